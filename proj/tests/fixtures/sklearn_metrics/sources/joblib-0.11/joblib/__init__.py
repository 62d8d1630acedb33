def dump(value, filename, compress=0):
    return [filename]
