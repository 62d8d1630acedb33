class Image:
    def resize(self, size, resample=0):
        return self


def open(fp, mode="r"):
    return Image()


def fromarray(obj, mode=None):
    return Image()
