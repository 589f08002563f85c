import json
from pathlib import Path

from spnet_summarizer import graph


def test_pipeline_trains_then_reuses_checkpoint(tmp_path, small_config) -> None:
    """Test convert, train and evaluate on a tiny synthetic corpus, then a rerun that skips training."""
    configurable = {
        "output_dir": str(tmp_path / "run"),
        "synthetic_dialogs": 20,
        "training": small_config(max_epochs=1, max_decode_len=10, beam_size=2).to_dict(),
    }

    res = graph.invoke({"input_path": ""}, {"configurable": configurable})

    assert res["trained"]
    assert res["epochs_run"] == 1
    assert Path(res["checkpoint_path"]).exists()
    report = json.loads(Path(res["report_path"]).read_text(encoding="utf-8"))
    assert report["n_evaluated"] + report["n_excluded"] == 2
    assert set(res["metrics"]) == {"rouge1", "rouge2", "rougeL", "cic", "domain_macro_f1"}

    again = graph.invoke({"input_path": ""}, {"configurable": configurable})
    assert not again["trained"]
    assert again["checkpoint_path"] == res["checkpoint_path"]
