from core import helper


def run(n):
    return helper(n)
