"""Masking stuck-at cells with a partitioned BCH code, step by step.

A short [15, 7, 4] code is small enough to print. We write a message into a
memory with three stuck cells, watch the encoder pick a masking word so the
stuck cells agree with what is written, then add one random error and
decode.
"""

import numpy as np

from pbchflash import bch, codec, gf2

rng = np.random.default_rng(1)
code = codec.construct_from_t(bch.make_field(4), t_correct=1, t_message=2)
print(f"code: n={code.n} k={code.k} l={code.l} r={code.r}, corrects {code.t_correct} error")

message = rng.integers(0, 2, code.k, dtype=np.uint8)
s_plus = codec.defects(code.n, stuck1=[2, 9], stuck0=[5])
print("message      ", message)
print("defects      ", "".join({-1: ".", 0: "0", 1: "1"}[int(v)] for v in s_plus))

plain = gf2.matvec(code.G1, message)
print("plain word   ", plain, " conflicts:", codec.defect_error_count(plain, s_plus))

enc = codec.encode(code, message, s_plus)
print("masking bits ", enc.d)
print("codeword     ", enc.codeword, " conflicts:", enc.unmasked_count)

stored = codec.circ(enc.codeword, s_plus)
assert np.array_equal(stored, enc.codeword)

received = stored.copy()
received[11] ^= 1
print("received     ", received, " (bit 11 flipped)")
out = codec.decode(code, received)
print("decoded      ", out.message, " ok:", np.array_equal(out.message, message))
