def zeros(shape, dtype=float):
    return shape
