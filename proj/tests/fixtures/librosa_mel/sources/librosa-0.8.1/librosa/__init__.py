from . import filters
