# Import all handlers to register them
from . import fixture, moduli, plot, scheme, separability
__all__ = ['scheme', 'moduli', 'fixture', 'separability', 'plot']

def register_handlers(app):
    """Register all command groups with the application"""
    scheme.register_handlers(app)
    moduli.register_handlers(app)
    fixture.register_handlers(app)
    separability.register_handlers(app)
    plot.register_handlers(app)
