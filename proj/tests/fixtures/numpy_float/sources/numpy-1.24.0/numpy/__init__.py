def zeros(shape, dtype=None, order="C"):
    return shape
