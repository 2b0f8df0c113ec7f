#!/usr/bin/env python3
"""HTTP sidecar serving a Hugging Face masked LM and NLI model to `clozegen`.

    python3 tools/model_server.py --mlm bert-large-uncased --nli roberta-large-mnli --port 8080
    clozegen generate -i pairs.jsonl --model http://127.0.0.1:8080

Routes (JSON in, JSON out): GET /info, POST /tokenize, /detokenize, /fill_mask, /nli.
Weights are read from CLOZEGEN_MODEL_CACHE when set.
"""

import argparse
import os

import torch
import uvicorn
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel
from transformers import (AutoModelForMaskedLM, AutoModelForSequenceClassification,
                          AutoTokenizer)


class TextIn(BaseModel):
    text: str


class TokensIn(BaseModel):
    tokens: list[str]


class FillIn(BaseModel):
    tokens: list[str]
    position: int
    top_k: int


class NliIn(BaseModel):
    premise: str
    hypothesis: str


def build_app(mlm_name: str, nli_name: str | None, device: str) -> FastAPI:
    cache = os.environ.get("CLOZEGEN_MODEL_CACHE") or None
    tok = AutoTokenizer.from_pretrained(mlm_name, cache_dir=cache)
    mlm = AutoModelForMaskedLM.from_pretrained(mlm_name, cache_dir=cache).to(device).eval()
    head = [i for i in (tok.cls_token_id if tok.cls_token_id is not None else tok.bos_token_id,) if i is not None]
    tail = [i for i in (tok.sep_token_id if tok.sep_token_id is not None else tok.eos_token_id,) if i is not None]
    special_ids = torch.tensor(sorted(set(tok.all_special_ids)), dtype=torch.long, device=device)
    max_len = min(tok.model_max_length, getattr(mlm.config, "max_position_embeddings", 512))
    if getattr(mlm.config, "model_type", "") in ("roberta", "xlm-roberta"):
        max_len -= 2  # position ids start after the padding index

    nli_tok = nli = None
    if nli_name:
        nli_tok = AutoTokenizer.from_pretrained(nli_name, cache_dir=cache)
        nli = AutoModelForSequenceClassification.from_pretrained(nli_name, cache_dir=cache).to(device).eval()

    app = FastAPI()

    @app.get("/info")
    def info():
        return {"name": mlm_name, "max_sequence_length": max_len - len(head) - len(tail), "mask_token": tok.mask_token}

    @app.post("/tokenize")
    def tokenize(req: TextIn):
        return {"tokens": tok.tokenize(req.text)}

    @app.post("/detokenize")
    def detokenize(req: TokensIn):
        return {"text": tok.convert_tokens_to_string(req.tokens).strip()}

    @app.post("/fill_mask")
    @torch.no_grad()
    def fill_mask(req: FillIn):
        if not 0 <= req.position < len(req.tokens) or req.tokens[req.position] != tok.mask_token:
            raise HTTPException(status_code=400, detail="position does not hold the mask token")
        ids = head + tok.convert_tokens_to_ids(req.tokens) + tail
        logits = mlm(input_ids=torch.tensor([ids], device=device)).logits[0, len(head) + req.position]
        logits[special_ids] = float("-inf")
        probs = torch.softmax(logits.float(), dim=-1)
        top = torch.topk(probs, k=min(req.top_k, probs.numel()))
        words = tok.convert_ids_to_tokens(top.indices.tolist())
        return {"predictions": [[w, float(p)] for w, p in zip(words, top.values.tolist()) if p > 0]}

    @app.post("/nli")
    @torch.no_grad()
    def classify(req: NliIn):
        if nli is None:
            raise HTTPException(status_code=501, detail="no NLI model loaded")
        enc = nli_tok(req.premise, req.hypothesis, return_tensors="pt", truncation=True).to(device)
        label = nli.config.id2label[int(nli(**enc).logits[0].argmax())]
        return {"label": label.lower()}

    return app


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--mlm", default="bert-large-uncased")
    ap.add_argument("--nli", default="roberta-large-mnli", help="empty string disables /nli")
    ap.add_argument("--host", default="127.0.0.1")
    ap.add_argument("--port", type=int, default=8080)
    ap.add_argument("--device", default="cuda" if torch.cuda.is_available() else "cpu")
    args = ap.parse_args()
    uvicorn.run(build_app(args.mlm, args.nli or None, args.device), host=args.host, port=args.port)


if __name__ == "__main__":
    main()
