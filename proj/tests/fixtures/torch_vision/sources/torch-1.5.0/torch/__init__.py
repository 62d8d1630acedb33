def tensor(data, dtype=None, requires_grad=False):
    return data


def cat(tensors, dim=0):
    return tensors[0]
