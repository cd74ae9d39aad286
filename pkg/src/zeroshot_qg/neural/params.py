"""Trainable parameter containers.

All math in this package runs on float64 C-order numpy arrays. A Parameter
pairs a value array with a same-shaped gradient buffer; training steps
accumulate into the buffer and zero it between mini-batches.
"""

import numpy as np


class Parameter:
    """A named value/gradient pair."""

    __slots__ = ("name", "value", "grad")

    def __init__(self, name, value):
        self.name = name
        self.value = np.ascontiguousarray(value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)

    @property
    def shape(self):
        return self.value.shape

    def zero_grad(self):
        self.grad[...] = 0.0

    def __repr__(self):
        return f"Parameter({self.name!r}, shape={self.value.shape})"


class ParameterSet:
    """Ordered collection of parameters keyed by unique name.

    Iteration order is insertion order, which keeps optimizer updates and
    gradient clipping deterministic.
    """

    def __init__(self):
        self._params = {}

    def add(self, name, value):
        if name in self._params:
            raise ValueError(f"duplicate parameter name: {name}")
        param = Parameter(name, value)
        self._params[name] = param
        return param

    def uniform(self, name, shape, rng, scale=0.1):
        return self.add(name, rng.uniform(-scale, scale, size=shape))

    def zeros(self, name, shape):
        return self.add(name, np.zeros(shape))

    def __iter__(self):
        return iter(self._params.values())

    def __len__(self):
        return len(self._params)

    def __getitem__(self, name):
        return self._params[name]

    def __contains__(self, name):
        return name in self._params

    def names(self):
        return list(self._params)

    def zero_grads(self):
        for param in self._params.values():
            param.zero_grad()

    def as_arrays(self):
        """Name -> value view, e.g. for checkpointing."""
        return {p.name: p.value for p in self}

    def load_arrays(self, arrays):
        """Copy values in from a name -> array mapping (shapes must match)."""
        for param in self:
            src = arrays[param.name]
            if src.shape != param.value.shape:
                raise ValueError(
                    f"parameter {param.name}: stored shape {src.shape} "
                    f"!= expected {param.value.shape}"
                )
            param.value[...] = src

    def copy_values(self):
        return {p.name: p.value.copy() for p in self}
