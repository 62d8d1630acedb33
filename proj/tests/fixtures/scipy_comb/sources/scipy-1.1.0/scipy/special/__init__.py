def comb(N, k, exact=False, repetition=False):
    return 0
