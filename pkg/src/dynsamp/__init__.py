"""Space-time sampling of bandlimited functions under diffusion."""

__version__ = "0.1.0"
