from .functional import to_tensor
