def array(obj, dtype=None):
    return obj
