from typing import Any, Callable, Dict, Hashable, Optional

_MISSING = object()


class CacheService:
    """
    Memo en memoria para resultados numéricos deterministas (sin expiración).
    """
    def __init__(self):
        self.cache: Dict[Hashable, Any] = {}
        self.hits = 0
        self.misses = 0

    def get(self, key: Hashable) -> Optional[Any]:
        """
        Obtiene un valor de la caché si existe.

        Args:
            key: Clave para buscar en la caché

        Returns:
            El valor almacenado o None si no existe
        """
        if key not in self.cache:
            self.misses += 1
            return None
        self.hits += 1
        return self.cache[key]

    def set(self, key: Hashable, value: Any) -> None:
        self.cache[key] = value

    def get_or_compute(self, key: Hashable, compute: Callable[[], Any]) -> Any:
        """
        Devuelve el valor memorizado o lo calcula y lo guarda.

        Args:
            key: Clave del resultado (debe identificar todos los parámetros)
            compute: Función sin argumentos que produce el valor
        """
        value = self.cache.get(key, _MISSING)
        if value is not _MISSING:
            self.hits += 1
            return value
        self.misses += 1
        value = compute()
        self.set(key, value)
        return value

    def clear(self) -> None:
        self.cache.clear()
        self.hits = 0
        self.misses = 0

    def get_size(self) -> int:
        return len(self.cache)
