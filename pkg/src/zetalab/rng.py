"""Counter-based random streams.

Every draw is a pure function of ``(master seed, stream name, row, column)``:
rows are trial indices, columns index primes (or sample slots).  Streams are
backed by numpy's Philox generator, whose state is just a counter, so any
block of rows can be regenerated without replaying earlier ones.  This is what
makes sharded Monte Carlo results independent of the number of workers.
"""

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1
ROW_STRIDE = 1 << 32  # outputs reserved per row (trial)


def derive_key(seed, *names):
    """128-bit Philox key from a master seed and a path of stream names."""
    text = "/".join([str(int(seed))] + [str(n) for n in names])
    digest = hashlib.blake2b(text.encode(), digest_size=16).digest()
    return np.frombuffer(digest, dtype="<u8").copy()


class CounterStream:
    """Uniform variates indexed by (row, column).

    Parameters
    ----------
    seed : int
        Master seed.
    *names : str
        Stream path, e.g. ``("random_models", "steinhaus")``.
    """

    def __init__(self, seed, *names):
        self.seed = int(seed)
        self.names = tuple(str(n) for n in names)
        self.key = derive_key(seed, *names)

    def _generator(self, first_output):
        # Philox emits 4 x 64-bit words per counter step.
        block, offset = divmod(first_output, 4)
        counter = np.array([(block >> (64 * i)) & _MASK64 for i in range(4)], dtype=np.uint64)
        gen = np.random.Generator(np.random.Philox(key=self.key, counter=counter))
        if offset:
            gen.random(offset)
        return gen

    def uniforms(self, row_start, n_rows, width):
        """Array of shape ``(n_rows, width)`` with values in ``[0, 1)``.

        Entry ``(i, c)`` depends only on ``(row_start + i, c)``: every row
        owns a fixed block of ``ROW_STRIDE`` outputs, so a column's value does
        not change when the width does.
        """
        if n_rows <= 0 or width <= 0:
            return np.zeros((max(n_rows, 0), max(width, 0)))
        if width > ROW_STRIDE:
            raise ValueError("width exceeds the row stride")
        out = np.empty((n_rows, width))
        for i in range(n_rows):
            out[i] = self._generator((int(row_start) + i) * ROW_STRIDE).random(width)
        return out

    def sequence(self, start, n):
        """Outputs ``start .. start + n - 1`` of the compact one-dimensional
        layout (independent of the row layout used by :meth:`uniforms`)."""
        return self.child("sequence")._generator(int(start)).random(int(n))

    def uniform_at(self, row, col, width=None):
        """The single value ``uniforms(row, 1, width)[0, col]``."""
        if not 0 <= col < ROW_STRIDE:
            raise IndexError("column outside the row stride")
        gen = self._generator(int(row) * ROW_STRIDE + int(col))
        return float(gen.random())

    def child(self, *names):
        return CounterStream(self.seed, *(self.names + tuple(names)))


def box_muller(u1, u2):
    """Standard complex Gaussians (E|Z|^2 = 1) from two uniform arrays in [0, 1)."""
    radius = np.sqrt(-np.log1p(-u1))
    return radius * np.exp(2j * np.pi * u2)
