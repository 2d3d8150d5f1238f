"""Sentence-embedding sidecar for the remote encoder backend.

POST /embed  {"texts": [...], "model": optional name}  ->  {"embeddings": [[...], ...]}

    python tools/embed_server.py
    percept train --backend heavy ...

The defaults match the "heavy_encoder" block of the run config (port 8765,
1024-wide vectors). Change both together when swapping models.
"""

import argparse
import functools

import uvicorn
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel
from sentence_transformers import SentenceTransformer


class EmbedRequest(BaseModel):
    texts: list[str]
    model: str | None = None


def build_app(default_model: str, max_seq_length: int) -> FastAPI:
    app = FastAPI()

    @functools.lru_cache(maxsize=4)
    def load(name: str) -> SentenceTransformer:
        m = SentenceTransformer(name)
        m.max_seq_length = max_seq_length
        return m

    load(default_model)

    @app.post("/embed")
    def embed(req: EmbedRequest) -> dict:
        if not req.texts:
            raise HTTPException(status_code=400, detail="texts is empty")
        try:
            model = load(req.model or default_model)
        except OSError as e:
            raise HTTPException(status_code=404, detail=f"unknown model: {e}") from e
        vectors = model.encode(req.texts, convert_to_numpy=True, show_progress_bar=False)
        return {"embeddings": vectors.astype(float).tolist()}

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "model": default_model}

    return app


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--model", default="BAAI/bge-large-en-v1.5")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8765)
    parser.add_argument("--max-seq-length", type=int, default=512)
    args = parser.parse_args()
    uvicorn.run(build_app(args.model, args.max_seq_length), host=args.host, port=args.port)


if __name__ == "__main__":
    main()
