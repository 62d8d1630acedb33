from .classification import accuracy_score, f1_score
