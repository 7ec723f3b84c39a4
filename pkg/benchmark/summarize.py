from pyperf import Benchmark
from pytablewriter import MarkdownTableWriter

from benchmark.common import RESULTS_DIR


def summarize() -> str:
    rows = []
    for file in sorted(RESULTS_DIR.glob("*.json")):
        benchmark = Benchmark.load(str(file))
        rows.append(
            [
                benchmark.get_name(),
                benchmark.format_value(benchmark.mean()),
                benchmark.format_value(benchmark.stdev()),
            ]
        )
    writer = MarkdownTableWriter(
        headers=["kernel", "mean", "stdev"], value_matrix=rows, margin=1
    )
    return writer.dumps()


if __name__ == "__main__":
    print(summarize())
