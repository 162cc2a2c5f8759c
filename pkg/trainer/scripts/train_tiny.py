#!/usr/bin/env python3
"""Train the desk-scale model and export codec-ready weight files.

Produces an intra-frame model, then a temporal model warm-started from it,
and writes both as .nlvw weight files plus a parity fixture sidecar.
"""

import argparse
import os

from nlvc_trainer.export import export_parity_fixture, export_weights
from nlvc_trainer.model import ModelConfig, TINY_CONFIG
from nlvc_trainer.train import (
    DATA_SYNTHETIC_IFRAME,
    DATA_SYNTHETIC_PFRAME,
    DATA_USER_Y4M,
    TrainConfig,
    train,
)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("outdir", nargs="?", default="weights")
    parser.add_argument("--steps", type=int, default=2000)
    parser.add_argument("--batch", type=int, default=4)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--y4m", help="train the intra model on this clip instead")
    args = parser.parse_args()
    os.makedirs(args.outdir, exist_ok=True)

    intra_cfg = TrainConfig(
        model=TINY_CONFIG, steps=args.steps, batch=args.batch, seed=args.seed,
        data_source=DATA_USER_Y4M if args.y4m else DATA_SYNTHETIC_IFRAME,
        y4m_path=args.y4m,
    )
    print(f"training intra model ({intra_cfg.model.layers}L d{intra_cfg.model.dim}) "
          f"for {args.steps} steps")
    intra = train(intra_cfg, log=print)

    path = os.path.join(args.outdir, "intra_tiny.nlvw")
    h = export_weights(intra.model, path)
    export_parity_fixture(intra.model, os.path.join(args.outdir, "intra_tiny.nlvf"))
    print(f"wrote {path} (hash {h:#018x})")

    p_model_cfg = ModelConfig(
        layers=TINY_CONFIG.layers, dim=TINY_CONFIG.dim, heads=TINY_CONFIG.heads,
        has_reference_embedding=True,
    )
    p_cfg = TrainConfig(model=p_model_cfg, steps=args.steps, batch=args.batch,
                        seed=args.seed + 1, data_source=DATA_SYNTHETIC_PFRAME)
    print(f"training temporal model (warm start) for {args.steps} steps")
    temporal = train(p_cfg, warm_start=intra.model, log=print)

    path = os.path.join(args.outdir, "temporal_tiny.nlvw")
    h = export_weights(temporal.model, path)
    export_parity_fixture(temporal.model, os.path.join(args.outdir, "temporal_tiny.nlvf"))
    print(f"wrote {path} (hash {h:#018x})")


if __name__ == "__main__":
    main()
