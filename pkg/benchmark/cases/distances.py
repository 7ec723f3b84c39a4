import pyperf

from benchmark.common import AbstractBenchmark, BenchmarkRunner
from fewshape.distill import pairwise_distances
from fewshape.voxels import VoxelGrid


class Benchmark(AbstractBenchmark):
    NAME = "pairwise_distances[32, 200]"

    def setup(self, rng):
        return [VoxelGrid(rng.random((32,) * 3) < 0.2) for _ in range(200)]

    def run(self, data) -> pyperf.Benchmark:
        return self._bench_func(pairwise_distances, data)


if __name__ == "__main__":
    BenchmarkRunner(Benchmark).run()
