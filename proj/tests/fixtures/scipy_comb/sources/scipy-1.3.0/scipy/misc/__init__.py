def face(gray=False):
    return None
