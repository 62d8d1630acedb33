import numpy as np


def accuracy_score(y_true, y_pred, normalize=True, sample_weight=None):
    return np.asarray(y_true)


def f1_score(y_true, y_pred, labels=None, pos_label=1, average="binary", sample_weight=None):
    return 0.0
