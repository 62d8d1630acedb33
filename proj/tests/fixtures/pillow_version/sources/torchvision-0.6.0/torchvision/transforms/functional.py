import torch
from PIL import Image, __version__ as PILLOW_VERSION


def to_tensor(pic):
    return torch.from_numpy(pic)
