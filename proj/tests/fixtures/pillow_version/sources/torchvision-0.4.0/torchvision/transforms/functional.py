import torch
from PIL import Image, PILLOW_VERSION


def to_tensor(pic):
    return torch.from_numpy(pic)
