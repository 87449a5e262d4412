import numpy as np
import pytest
import scipy.io.wavfile
import torch
from transformers import HubertConfig, HubertModel


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """A small randomly initialised encoder with the standard 20 ms stride."""
    config = HubertConfig(
        hidden_size=32, num_hidden_layers=2, num_attention_heads=2,
        intermediate_size=64, conv_dim=(32,) * 7)
    torch.manual_seed(0)
    model = HubertModel(config)
    path = tmp_path_factory.mktemp("tiny_model")
    model.save_pretrained(path)
    return path


@pytest.fixture(scope="session")
def base_model_dir(tmp_path_factory):
    """Base-geometry encoder (768-dim, 12 layers), randomly initialised.

    The sandbox has no model hub access; geometry, timing, and format
    behaviour are checkpoint-independent.
    """
    torch.manual_seed(0)
    model = HubertModel(HubertConfig())
    path = tmp_path_factory.mktemp("base_model")
    model.save_pretrained(path)
    return path


def write_wav(path, samples, rate=16000):
    scipy.io.wavfile.write(path, rate, samples)


@pytest.fixture()
def sine_wav(tmp_path):
    """1.00 s, 440 Hz, 16 kHz mono, int16."""
    t = np.arange(16000) / 16000.0
    samples = (0.5 * np.sin(2 * np.pi * 440 * t) * 32767).astype(np.int16)
    path = tmp_path / "sine.wav"
    write_wav(path, samples)
    return path
