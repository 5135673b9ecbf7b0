from services.cache_service import CacheService

# Singletons para los servicios
_quadrature_cache = None
_output_service = None


def get_quadrature_cache() -> CacheService:
    """
    Obtiene una instancia única del memo de cuadraturas.
    Esto asegura que los tiempos de etapa se compartan entre todas las trayectorias del proceso.
    """
    global _quadrature_cache
    if _quadrature_cache is None:
        _quadrature_cache = CacheService()
    return _quadrature_cache


def get_output_service():
    """
    Obtiene una instancia única del servicio de escritura de resultados.
    """
    from services.output_service import OutputService

    global _output_service
    if _output_service is None:
        _output_service = OutputService()
    return _output_service
