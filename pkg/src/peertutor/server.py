"""TCP gateway: one envelope per line over a persistent connection.

I/O runs concurrently per connection, but every state mutation is
serialized through one asyncio lock (the application queue), and is
appended to the event log before any reply or push goes out. A user may
hold any number of connections; pushes fan out to all of them.
"""

import argparse
import asyncio
import logging
import time

from .config import Config
from .content import load_content_dir
from .core import App
from .errors import ProtocolError
from .eventlog import Store
from .protocol import ConnState, Dispatcher, decode_line, encode

log = logging.getLogger("peertutor.server")

AUTH_TIMEOUT_S = 10
MAX_LINE = 1 << 20


class GatewayServer:
    def __init__(self, app: App, store: Store | None = None,
                 clock=time.time):
        self.app = app
        self.clock = clock
        self.dispatcher = Dispatcher(app, store, clock)
        self.queue_lock = asyncio.Lock()  # the single application queue
        self.connections: dict[str, set] = {}  # user_id -> {(writer, conn)}
        self._tick_task = None

    # -- push fan-out ----------------------------------------------------------

    def _deliver(self, pushes):
        for user_id, envelope in pushes:
            for writer, conn in self.connections.get(user_id, set()):
                if writer.is_closing():
                    continue
                out = dict(envelope)
                out["seq"] = conn.next_out_seq()
                writer.write(encode(out))

    # -- clock -------------------------------------------------------------------

    async def run_clock(self, interval: float = 1.0):
        while True:
            await asyncio.sleep(interval)
            async with self.queue_lock:
                pushes = self.dispatcher.tick(self.clock())
                self._deliver(
                    [(u, {"type": k, "payload": p}) for u, k, p in pushes])

    # -- connections --------------------------------------------------------------

    async def handle_connection(self, reader: asyncio.StreamReader,
                                writer: asyncio.StreamWriter):
        conn = ConnState()
        try:
            line = await asyncio.wait_for(reader.readline(),
                                          timeout=AUTH_TIMEOUT_S)
            while line:
                envelope = decode_line(line)
                async with self.queue_lock:
                    reply, pushes = self.dispatcher.handle(conn, envelope)
                    reply["seq"] = conn.next_out_seq()
                    writer.write(encode(reply))
                    if (conn.user_id is not None
                            and reply["type"] == "auth_ok"):
                        self.connections.setdefault(
                            conn.user_id, set()).add((writer, conn))
                    self._deliver(pushes)
                await writer.drain()
                line = await reader.readline()
                if len(line) > MAX_LINE:
                    raise ProtocolError("line too long")
        except asyncio.TimeoutError:
            writer.write(encode({"type": "error", "seq": 0, "payload": {
                "code": "auth_failed", "message": "auth timeout"}}))
        except ProtocolError as exc:
            # malformed traffic: one error frame, then hang up
            try:
                writer.write(encode({"type": "error",
                                     "seq": conn.next_out_seq(),
                                     "payload": {"code": exc.code,
                                                 "message": str(exc)}}))
            except ConnectionError:
                pass
        except (ConnectionError, asyncio.IncompleteReadError):
            pass
        finally:
            if conn.user_id is not None:
                conns = self.connections.get(conn.user_id, set())
                conns.discard((writer, conn))
            writer.close()
            try:
                await writer.wait_closed()
            except ConnectionError:
                pass

    async def serve(self, host: str, port: int, with_clock: bool = True):
        server = await asyncio.start_server(self.handle_connection, host, port)
        if with_clock:
            self._tick_task = asyncio.create_task(self.run_clock())
        addr = server.sockets[0].getsockname()
        log.info("listening on %s:%s", addr[0], addr[1])
        async with server:
            await server.serve_forever()


def build_app(content_dir, data_dir=None, config: Config | None = None):
    config = config or Config()
    decks = load_content_dir(content_dir, config.languages)
    app = App(config, decks, start_time=time.time())
    store = None
    if data_dir is not None:
        store = Store(data_dir, snapshot_every=config.snapshot_every)
        store.recover(app)
    return app, store


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="peertutor-server",
        description="Real-time peer teaching server")
    parser.add_argument("--listen", default="127.0.0.1:7700",
                        metavar="ADDR:PORT")
    parser.add_argument("--data-dir", default="./data")
    parser.add_argument("--content-dir", required=True)
    parser.add_argument("--config", default=None)
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO,
                        format="%(asctime)s %(name)s %(message)s")
    config = Config.load(args.config)
    app, store = build_app(args.content_dir, args.data_dir, config)
    gateway = GatewayServer(app, store)
    host, _, port = args.listen.rpartition(":")
    asyncio.run(gateway.serve(host or "127.0.0.1", int(port)))


if __name__ == "__main__":
    main()
