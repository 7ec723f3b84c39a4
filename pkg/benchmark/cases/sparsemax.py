import pyperf
import torch

from benchmark.common import AbstractBenchmark, BenchmarkRunner
from fewshape.nn import sparsemax


class Benchmark(AbstractBenchmark):
    NAME = "sparsemax[1024, 32]"

    def setup(self, rng):
        return torch.from_numpy(rng.normal(size=(1024, 32)))

    def warmup(self, data) -> None:
        sparsemax(data)

    def run(self, data) -> pyperf.Benchmark:
        return self._bench_func(sparsemax, data)


if __name__ == "__main__":
    BenchmarkRunner(Benchmark).run()
