import numpy as np


def distance(a, b):
    return np.zeros(3, dtype=np.float)
