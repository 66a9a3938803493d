#!/usr/bin/env python3
# Copyright 2026 The FFCI Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes provider cache entries for a list of requests using a toy encoder.

The toy encoder is deterministic and dependency-free: every (model, layer,
token) triple hashes to a fixed unit vector, sentence vectors are token means,
and NSP probabilities grow with lexical overlap. It exists so the C++ test
suite can run offline against real cache files; it is not a language model.

Usage:
  ffci eval --dataset D --plan-requests requests.jsonl
  export_fixture_cache.py requests.jsonl CACHE_DIR
"""

import argparse
import hashlib
import json
import os
import re
import struct
import sys

MAGIC = b"FFCI-CACHE 1\n"
CREATED_AT = "1970-01-01T00:00:00Z"
DIM = 8


def canonical(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def cache_key(request):
    return hashlib.sha256(canonical(request).encode("utf-8")).hexdigest()


def toy_tokens(text):
    return ["<s>"] + re.findall(r"\w+|[^\w\s]", text.lower()) + ["</s>"]


def unit_vector(seed):
    digest = hashlib.sha256(seed.encode("utf-8")).digest()
    raw = [(int.from_bytes(digest[4 * i:4 * i + 4], "little") / 2**32) * 2 - 1 for i in range(DIM)]
    norm = sum(x * x for x in raw) ** 0.5
    return [x / norm for x in raw]


def normalized(v):
    norm = sum(x * x for x in v) ** 0.5
    return [x / norm for x in v]


def header_bytes(header):
    return canonical(header).encode("utf-8") + b"\n"


def entry_bytes(request):
    kind = request["kind"]
    header = {"request_kind": kind, "model": request["model"], "layer": -1,
              "dim": 0, "count": 0, "created_at": CREATED_AT}
    payload = b""
    if kind == "token_embeddings":
        tokens = toy_tokens(request["text"])
        header.update(layer=request["layer"], dim=DIM, count=len(tokens), tokens=tokens)
        for t in tokens:
            vec = unit_vector(f"{request['model']}|{request['layer']}|{t}")
            payload += b"".join(struct.pack("<f", x) for x in vec)
    elif kind == "sts_embeddings":
        acc = [0.0] * DIM
        for t in toy_tokens(request["text"])[1:-1] or ["<empty>"]:
            for i, x in enumerate(unit_vector(f"{request['model']}|sts|{t}")):
                acc[i] += x
        header.update(dim=DIM, count=1)
        payload = b"".join(struct.pack("<f", x) for x in normalized(acc))
    elif kind == "nsp":
        a = set(toy_tokens(request["first"])[1:-1])
        b = set(toy_tokens(request["second"])[1:-1])
        jaccard = len(a & b) / len(a | b) if a | b else 0.0
        u = int(hashlib.sha256(canonical(request).encode("utf-8")).hexdigest()[:8], 16) / 2**32
        payload = struct.pack("<d", 0.2 + 0.6 * jaccard + 0.2 * u)
    elif kind == "segments":
        text = request["text"]
        spans = [[m.start(), m.end()] for m in re.finditer(r"[^.!?]+[.!?]*", text)
                 if m.group().strip()]
        spans = [[s + len(text[s:e]) - len(text[s:e].lstrip()), e] for s, e in spans]
        header["spans"] = spans
    elif kind == "entities":
        header["entities"] = sorted(set(re.findall(r"(?<!^)[A-Z][a-z]+(?: [A-Z][a-z]+)*",
                                                   request["text"])))
    else:
        raise ValueError(f"unknown request kind {kind!r}")
    return MAGIC + header_bytes(header) + payload


def main(argv):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("requests")
    ap.add_argument("cache_dir")
    args = ap.parse_args(argv)

    os.makedirs(args.cache_dir, exist_ok=True)
    written = []
    with open(args.requests, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            request = json.loads(line)
            key = cache_key(request)
            tmp = os.path.join(args.cache_dir, f".tmp-{key}")
            with open(tmp, "wb") as out:
                out.write(entry_bytes(request))
            os.replace(tmp, os.path.join(args.cache_dir, key))
            written.append(key)
    with open(os.path.join(args.cache_dir, "MANIFEST"), "w") as m:
        m.write("\n".join(sorted(written)) + "\n")
    print(f"wrote {len(written)} entries", file=sys.stderr)


if __name__ == "__main__":
    main(sys.argv[1:])
