"""
Shared fixtures: small codes and reproducible channel draws
"""

import numpy as np
import pytest

from gcdkit.models.channel import ChannelSpec
from gcdkit.services.channel import receive_llrs
from gcdkit.services.codes import hamming_code, random_code, rm_code
from gcdkit.services.polar import construct_polar


@pytest.fixture(scope="session")
def hamming():
    return hamming_code(3)


@pytest.fixture(scope="session")
def rm16():
    """RM(1,4): [16,5], minimum distance 8"""
    return rm_code(4, 1)


@pytest.fixture(scope="session")
def random24():
    return random_code(24, 12, seed=11)


@pytest.fixture(scope="session")
def polar8():
    """C[8,4] with active set {3,5,6,7}"""
    return construct_polar(8, 4)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def _noisy_word(code, snr_db: float, seed: int):
    rng = np.random.default_rng(seed)
    sent = code.encode(rng.integers(0, 2, size=code.k, dtype=np.uint8))
    return sent, receive_llrs(sent, ChannelSpec.at_snr(snr_db, code.rate), rng)


@pytest.fixture(scope="session")
def noisy_word():
    """noisy_word(code, snr_db, seed) -> (sent codeword, LLRs) of a random message"""
    return _noisy_word
