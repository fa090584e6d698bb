"""gcdkit: guessing codeword decoding and SCL-by-GCD polar decoding"""

__version__ = "1.0.0"
