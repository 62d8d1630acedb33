__version__ = "6.2.0"
PILLOW_VERSION = __version__
