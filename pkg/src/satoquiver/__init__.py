"""satoquiver: exact quiver flat sections, normal forms, curves, transforms."""

__version__ = "0.1.0"
