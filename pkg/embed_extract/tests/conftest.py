import json

import pytest
import torch

FIXTURE_TEXTS = [
    "What is the capital of France? Paris is the capital of France.",
    "Explain photosynthesis briefly. Plants convert light into chemical energy.",
    "How do I sort a list in Python? Use the sorted() builtin or list.sort().",
    "Is it safe to mix bleach and ammonia? No, the mixture releases toxic gases.",
    "Suggest a name for a cat. How about Mochi?",
]


@pytest.fixture(scope="session")
def tiny_encoder(tmp_path_factory):
    """A deterministic local encoder: seeded 2-layer causal model plus a
    byte-level BPE tokenizer trained offline on the fixture text."""
    from tokenizers import Tokenizer, models, pre_tokenizers, trainers
    from transformers import GPT2Config, GPT2Model, PreTrainedTokenizerFast

    model_dir = tmp_path_factory.mktemp("tiny-encoder")

    tok = Tokenizer(models.BPE(unk_token="[UNK]"))
    tok.pre_tokenizer = pre_tokenizers.ByteLevel()
    trainer = trainers.BpeTrainer(
        vocab_size=384,
        special_tokens=["[UNK]", "[PAD]"],
        initial_alphabet=pre_tokenizers.ByteLevel.alphabet(),
    )
    tok.train_from_iterator(FIXTURE_TEXTS, trainer)
    fast = PreTrainedTokenizerFast(
        tokenizer_object=tok, unk_token="[UNK]", pad_token="[PAD]"
    )
    fast.save_pretrained(model_dir)

    torch.manual_seed(0)
    config = GPT2Config(
        n_layer=2,
        n_head=2,
        n_embd=32,
        vocab_size=fast.vocab_size,
        n_positions=64,
        bos_token_id=None,
        eos_token_id=None,
    )
    GPT2Model(config).save_pretrained(model_dir)
    return model_dir


@pytest.fixture
def five_record_jsonl(tmp_path):
    path = tmp_path / "input.jsonl"
    lines = []
    for i, text in enumerate(FIXTURE_TEXTS):
        prompt, _, completion = text.partition("? ")
        if not completion:
            prompt, _, completion = text.partition(". ")
        lines.append(json.dumps({
            "id": f"fx{i}",
            "prompt": prompt,
            "completion": completion,
            "label": i % 2 == 0,
        }))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
