"""Write data/digits.csv: label first, then 784 pixel intensities.

The 5,000 MNIST digits bundled with the mlxtend wheel are used. That file is
sorted by label, so rows are interleaved (0, 1, ..., 9, 0, 1, ...) to make
any prefix a balanced sample.
"""

import glob
import gzip
import subprocess
import sys
import tempfile
import zipfile
from collections import defaultdict
from pathlib import Path

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


def main() -> None:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data" / "digits.csv"
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "mlxtend", "--no-deps", "-d", tmp],
            check=True,
        )
        wheel = zipfile.ZipFile(glob.glob(f"{tmp}/*.whl")[0])
        text = gzip.decompress(wheel.read(MEMBER)).decode()

    by_label = defaultdict(list)
    for line in text.splitlines():
        fields = line.split(",")
        label = str(int(float(fields[-1])))
        pixels = [str(int(float(x))) for x in fields[:-1]]
        by_label[label].append(",".join([label] + pixels))

    per_label = min(len(rows) for rows in by_label.values())
    lines = ["label," + ",".join(f"pixel{i}" for i in range(784))]
    for i in range(per_label):
        for label in sorted(by_label):
            lines.append(by_label[label][i])

    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {len(lines) - 1} digits to {out}")


if __name__ == "__main__":
    main()
