"""Run the model server: ``python -m model_server`` or ``greedyfool-model-server``."""

import argparse

import uvicorn

from .app import ServerConfig, create_app


def main(argv=None):
    parser = argparse.ArgumentParser(prog="greedyfool-model-server")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--bearer-token", default=None)
    args = parser.parse_args(argv)
    config = ServerConfig(host=args.host, port=args.port, bearer_token=args.bearer_token)
    uvicorn.run(create_app(config), host=config.host, port=config.port, log_level="info")


if __name__ == "__main__":
    main()
