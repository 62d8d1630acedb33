from plugin import run


def main():
    return run(3)
