import pyperf

from benchmark.common import AbstractBenchmark, BenchmarkRunner
from fewshape.voxels import VoxelGrid, iou_many


class Benchmark(AbstractBenchmark):
    NAME = "iou_many[32, 256]"

    def setup(self, rng):
        grids = rng.random((257, 32, 32, 32)) < 0.3
        return VoxelGrid(grids[0]), [VoxelGrid(g) for g in grids[1:]]

    def warmup(self, data) -> None:
        iou_many(*data)

    def run(self, data) -> pyperf.Benchmark:
        return self._bench_func(iou_many, *data)


if __name__ == "__main__":
    BenchmarkRunner(Benchmark).run()
