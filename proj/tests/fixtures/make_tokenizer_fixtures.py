#!/usr/bin/env python3
"""Builds the fixture tokenizers and the frozen token-count corpus.

Two small byte-level BPE tokenizers are trained with the HuggingFace
`tokenizers` library, which also serves as the reference encoder for the
frozen expected counts:

  tokenizer_split.json  - Split(regex) + ByteLevel(use_regex=False), the
                          layout used by Qwen-family tokenizer.json files
  tokenizer_bytelevel.json - plain ByteLevel(use_regex=True), the GPT-2 layout

Counts are written to token_count_corpus.json as {"text", "count"} rows.
"""

import json
import random

from tokenizers import Tokenizer, Regex, models, pre_tokenizers, trainers, decoders

QWEN_SPLIT = (
    r"""(?i:'s|'t|'re|'ve|'m|'ll|'d)|[^\r\n\p{L}\p{N}]?\p{L}+|\p{N}| ?"""
    r"""[^\s\p{L}\p{N}]+[\r\n]*|\s*[\r\n]+|\s+(?!\S)|\s+"""
)

TRAIN_TEXT = [
    "So the answer is \\boxed{42}. Let me verify this result once more.",
    "We need to solve for x in the equation 3x + 7 = 19, so x = 4.",
    "First, compute the greatest common divisor of 48 and 36, which is 12.",
    "The probability equals \\frac{3}{8} after counting all outcomes.",
    "Wait, I should double check the arithmetic: 17 * 23 = 391.",
    "Therefore the final answer is 3150 dollars in total.",
    "Let n denote the number of students; then 5n - 2 = 48.",
    "The triangle has sides 3, 4, and 5, hence a right angle.",
    "#### 72\nThe sum of the first twelve positive integers is 78.",
    "Alternatively, consider the polynomial p(x) = x^2 - 5x + 6.",
    "Hmm, that does not look right, let me try another approach instead.",
    "The area of the circle is \\pi r^2 where r = 7, giving 49\\pi.",
    "数学の問題を解くには注意深く考える必要があります。",
    "数学题的答案是四十二。我们再检查一遍。",
    "Révisons l'énoncé: la réponse finale est 0.5, c'est-à-dire un demi.",
    "We can't rule out x = -1, but we'll verify it doesn't satisfy the constraint.",
    "Step 1: expand. Step 2: simplify. Step 3: conclude the proof.",
    "If a/b = 2/3 and b/c = 9/4, then a/c = 3/2 by multiplication.",
    "The remainder when 2^100 is divided by 7 equals 2.",
    "In conclusion, the shortest correct path uses exactly 1588 tokens.",
]


def build_split_tokenizer():
    tok = Tokenizer(models.BPE())
    tok.pre_tokenizer = pre_tokenizers.Sequence(
        [
            pre_tokenizers.Split(Regex(QWEN_SPLIT), behavior="isolated", invert=False),
            pre_tokenizers.ByteLevel(add_prefix_space=False, use_regex=False),
        ]
    )
    tok.decoder = decoders.ByteLevel()
    trainer = trainers.BpeTrainer(
        vocab_size=700,
        special_tokens=["<|endoftext|>", "<|im_start|>", "<|im_end|>"],
        initial_alphabet=pre_tokenizers.ByteLevel.alphabet(),
        show_progress=False,
    )
    tok.train_from_iterator(TRAIN_TEXT, trainer)
    return tok


def build_bytelevel_tokenizer():
    tok = Tokenizer(models.BPE())
    tok.pre_tokenizer = pre_tokenizers.ByteLevel(add_prefix_space=False)
    tok.decoder = decoders.ByteLevel()
    trainer = trainers.BpeTrainer(
        vocab_size=600,
        special_tokens=["<|endoftext|>"],
        initial_alphabet=pre_tokenizers.ByteLevel.alphabet(),
        show_progress=False,
    )
    tok.train_from_iterator(TRAIN_TEXT, trainer)
    return tok


CORPUS = [
    "So the answer is \\boxed{42}.",
    "We need to solve for x in 3x + 7 = 19.",
    "The probability equals \\frac{3}{8}.",
    "17 * 23 = 391",
    "#### 72",
    "x = 4",
    "a/b = 2/3 and b/c = 9/4",
    "The remainder when 2^100 is divided by 7 equals 2.",
    "数学の問題",
    "答案是四十二",
    "Révisons l'énoncé.",
    "can't won't we'll it's I'd you're they've I'M YOU'RE",
    "line one\nline two\r\nline three",
    "trailing spaces   \nnext",
    "   leading spaces",
    "tab\tseparated\tvalues",
    "1234567890",
    "3,150 dollars",
    "(0,1)",
    "\\left( \\frac{1}{2}, \\frac{3}{4} \\right)",
    "mixed 123abc456def",
    "multiple   internal    spaces",
    "<|endoftext|>",
    "prefix <|endoftext|> suffix",
    "non breaking spaces　here",
    "emoji \U0001f600 and symbols ∈ π √",
    "Hmm, wait: -5 + 3 = -2, not -8!",
    "Step 1: expand. Step 2: simplify.",
    "",
    "a",
    "The sum of the first twelve positive integers is 78.",
    "  double  spaced  ",
]


def main():
    random.seed(7)
    split_tok = build_split_tokenizer()
    split_tok.save("tokenizer_split.json", pretty=True)
    bl_tok = build_bytelevel_tokenizer()
    bl_tok.save("tokenizer_bytelevel.json", pretty=True)

    rows = []
    for text in CORPUS:
        enc = split_tok.encode(text, add_special_tokens=False)
        rows.append({"text": text, "count": len(enc.ids)})
    with open("token_count_corpus.json", "w") as f:
        json.dump(rows, f, ensure_ascii=False, indent=1)

    bl_rows = []
    for text in CORPUS[:10]:
        enc = bl_tok.encode(text, add_special_tokens=False)
        bl_rows.append({"text": text, "count": len(enc.ids)})
    with open("token_count_corpus_bytelevel.json", "w") as f:
        json.dump(bl_rows, f, ensure_ascii=False, indent=1)

    # Sanity sweep for the concatenation property used by the property tests:
    # realistic fragments joined directly should not tokenize to more than the
    # sum of their parts.
    frags = [
        "hello", "world", " the answer", " is 42", "x+y", " 3.14", "\nnew line",
        "wait,", " verify", "步骤", "  ", "Thus ", "frac{1}{2}", "####", " no.",
    ]
    worst = 0
    for _ in range(2000):
        a = "".join(random.choices(frags, k=random.randint(1, 4)))
        b = "".join(random.choices(frags, k=random.randint(1, 4)))
        ca = len(split_tok.encode(a, add_special_tokens=False).ids)
        cb = len(split_tok.encode(b, add_special_tokens=False).ids)
        cab = len(split_tok.encode(a + b, add_special_tokens=False).ids)
        worst = max(worst, cab - (ca + cb))
    print("max count(a+b) - (count(a)+count(b)) over sweep:", worst)
    print("vocab sizes:", split_tok.get_vocab_size(), bl_tok.get_vocab_size())


if __name__ == "__main__":
    main()
