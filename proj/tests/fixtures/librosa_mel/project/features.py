import librosa


def mel_basis(sr, n_fft):
    return librosa.filters.mel(sr, n_fft, n_mels=80)
