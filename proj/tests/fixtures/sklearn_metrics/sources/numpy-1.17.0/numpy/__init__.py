def asarray(a, dtype=None):
    return a
