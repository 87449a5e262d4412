"""Frame-embedding extraction with a frozen self-supervised speech model."""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import prod
from pathlib import Path

import numpy as np
import torch

from . import frm
from .audio import TARGET_RATE, load_audio_16k
from .errors import BadManifest, ModelLoadError

DEFAULT_MODEL = "facebook/hubert-base-ls960"


@dataclass
class ExtractionJob:
    audio_path: Path
    output_frm_path: Path
    model: str = DEFAULT_MODEL
    layer: int | None = None  # None: the model's final hidden layer
    # "model": take hidden_states[layer] exactly as the checkpoint emits
    # them; "apply": additionally pass the final encoder LayerNorm, for
    # pre-norm architectures where the raw last layer is unnormalised.
    final_norm: str = "model"


class FrameEncoder:
    """A frozen encoder plus the geometry needed to describe its output."""

    def __init__(self, name_or_path: str, layer: int | None = None,
                 final_norm: str = "model"):
        from transformers import AutoModel

        if final_norm not in ("model", "apply"):
            raise ModelLoadError(f"final_norm must be 'model' or 'apply', got {final_norm!r}")
        try:
            self.model = AutoModel.from_pretrained(name_or_path)
        except Exception as exc:  # transformers raises a zoo of types here
            raise ModelLoadError(f"cannot load model {name_or_path!r}: {exc}") from exc
        self.model.eval()
        self.name = str(name_or_path)
        self.final_norm = final_norm
        config = self.model.config
        self.dim = int(config.hidden_size)
        if not hasattr(config, "conv_stride"):
            raise ModelLoadError(
                f"{name_or_path!r} is not a frame-level speech encoder "
                "(no convolutional front end)")
        self.hop = float(prod(config.conv_stride)) / TARGET_RATE
        n_layers = int(config.num_hidden_layers)
        self.layer = n_layers if layer is None else layer
        if not 0 <= self.layer <= n_layers:
            raise ModelLoadError(
                f"layer {self.layer} out of range for a {n_layers}-layer model")

    def encode(self, samples: np.ndarray) -> np.ndarray:
        """(frame_count, dim) float32 activations for 16 kHz mono samples."""
        batch = torch.from_numpy(np.ascontiguousarray(samples, dtype=np.float32))
        with torch.inference_mode():
            out = self.model(batch.unsqueeze(0), output_hidden_states=True)
            hidden = out.hidden_states[self.layer]
            if self.final_norm == "apply":
                encoder = getattr(self.model, "encoder", None)
                norm = getattr(encoder, "layer_norm", None)
                if norm is not None:
                    hidden = norm(hidden)
        return hidden.squeeze(0).numpy().astype(np.float32)


def extract(job: ExtractionJob, encoder: FrameEncoder | None = None) -> dict:
    """Run one audio file through the encoder and write its FRM1 file."""
    if encoder is None:
        encoder = FrameEncoder(job.model, job.layer, job.final_norm)
    samples = load_audio_16k(job.audio_path)
    frames = encoder.encode(samples)
    job.output_frm_path.parent.mkdir(parents=True, exist_ok=True)
    frm.write_frm(job.output_frm_path, encoder.hop, frames)
    return {
        "audio_path": str(job.audio_path),
        "output": str(job.output_frm_path),
        "status": "extracted",
        "frames": int(frames.shape[0]),
        "dim": int(frames.shape[1]),
        "hop": encoder.hop,
        "model": encoder.name,
        "layer": encoder.layer,
        "final_norm": encoder.final_norm,
    }


def load_manifest(path) -> list[dict]:
    """JSON array (or JSONL) of {"audio_path": ..., "output": optional}."""
    text = Path(path).read_text("utf-8")
    try:
        if text.lstrip().startswith("["):
            entries = json.loads(text)
        else:
            entries = [json.loads(line) for line in text.splitlines() if line.strip()]
    except json.JSONDecodeError as exc:
        raise BadManifest(f"manifest is not valid JSON: {exc}") from exc
    for entry in entries:
        if not isinstance(entry, dict) or "audio_path" not in entry:
            raise BadManifest("every manifest entry needs an 'audio_path'")
    return entries


def batch_extract(manifest_path, out_dir, model: str = DEFAULT_MODEL,
                  layer: int | None = None, final_norm: str = "model",
                  workers: int = 1) -> list[dict]:
    """Extract every manifest entry, skipping outputs that already validate.

    Failures are recorded per file and do not stop the batch.  Returns the
    summary records and writes them to <out_dir>/extract_summary.jsonl.
    """
    entries = load_manifest(manifest_path)
    base = Path(manifest_path).parent
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    jobs = []
    for entry in entries:
        audio = base / entry["audio_path"]
        target = out / entry.get("output", Path(entry["audio_path"]).stem + ".frm")
        jobs.append(ExtractionJob(audio, target, model, layer, final_norm))

    encoder = FrameEncoder(model, layer, final_norm)
    results = []
    pending = []
    for job in jobs:
        if frm.is_valid_frm(job.output_frm_path, encoder.dim):
            results.append({"audio_path": str(job.audio_path),
                            "output": str(job.output_frm_path),
                            "status": "skipped_existing"})
        else:
            pending.append(job)

    def run_one(job):
        try:
            return extract(job, encoder)
        except Exception as exc:
            return {"audio_path": str(job.audio_path),
                    "output": str(job.output_frm_path),
                    "status": "failed",
                    "error": f"{type(exc).__name__}: {exc}"}

    if workers > 1 and len(pending) > 1:
        from concurrent.futures import ThreadPoolExecutor

        # torch releases the GIL during inference, so threads pipeline I/O
        # against compute without reloading the model per process
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results.extend(pool.map(run_one, pending))
    else:
        results.extend(run_one(job) for job in pending)

    results.sort(key=lambda r: r["audio_path"])
    summary_path = out / "extract_summary.jsonl"
    summary_path.write_text(
        "\n".join(json.dumps(r, sort_keys=True) for r in results) + "\n", "utf-8")
    return results
