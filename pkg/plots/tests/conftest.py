import pytest

HEADER = "epoch,entity,train_loss,train_acc,test_acc"


def metrics_text(epochs=5, clients=3, base=0.5):
    lines = [HEADER]
    for epoch in range(1, epochs + 1):
        for k in range(clients):
            loss = 0.3 / epoch + 0.01 * k
            acc = min(1.0, base + 0.08 * epoch - 0.02 * k)
            lines.append(f"{epoch},client_{k},{loss},{acc},{acc - 0.05}")
        lines.append(f"{epoch},global,,,{min(1.0, base + 0.07 * epoch)}")
    return "\n".join(lines) + "\n"


@pytest.fixture
def metrics_file(tmp_path):
    path = tmp_path / "simple.csv"
    path.write_text(metrics_text(), encoding="utf-8")
    return path


@pytest.fixture
def three_scheme_files(tmp_path):
    paths = []
    for name in ("simple", "weighted", "best_pick"):
        path = tmp_path / f"{name}.csv"
        path.write_text(metrics_text(), encoding="utf-8")
        paths.append(path)
    return paths
