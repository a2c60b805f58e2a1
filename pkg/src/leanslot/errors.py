"""Exception types raised by the allocators."""


class InfeasibleRateError(ValueError):
    """Target rate cannot be carried within the frame at maximal power."""

    def __init__(self, rate, r_max, message=None):
        self.rate = rate
        self.r_max = r_max
        super().__init__(
            message
            or f"rate {rate:.6g} exceeds R_max = {r_max:.6g} bits/channel use"
        )


class BindingRegimeError(ValueError):
    """TDMA slot budget is binding; only the fully-active benchmark applies.

    ``benchmark_p_cons`` holds the uniform benchmark consumption (or ``None``
    when the benchmark itself is infeasible) so sweeps can keep plotting.
    """

    def __init__(self, load, benchmark_p_cons=None):
        self.load = load
        self.benchmark_p_cons = benchmark_p_cons
        super().__init__(
            f"sum of R_k / R_hat_k = {load:.6g} > 1: slot budget is binding, "
            "use tdma_uniform_benchmark instead"
        )
