from .resnet import resnet18
