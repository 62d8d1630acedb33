from statlib.core import choose
