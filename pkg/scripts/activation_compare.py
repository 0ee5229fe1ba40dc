"""How many hidden units survive with sinLU versus tanh on the same problem."""

import argparse

from bipinn.experiments import problem_config, run_config


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--problem", default="sin2")
    parser.add_argument("--epochs", type=int, default=100_000)
    parser.add_argument("--seeds", type=int, default=3)
    args = parser.parse_args()

    for activation in ("sinlu", "tanh"):
        for seed in range(args.seeds):
            cfg = problem_config(args.problem)
            cfg.activation = activation
            cfg.epochs = args.epochs
            cfg.seed = seed
            row = run_config(cfg)
            print(f"{activation:5s} seed {seed}: {row['active_hidden_units']:2d} active units, "
                  f"euclidean {row['test_euclidean']:.4f}")


if __name__ == "__main__":
    main()
