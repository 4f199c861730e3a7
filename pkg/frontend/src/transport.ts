/** Channel abstraction: the client only needs "send a line, hear lines".
 *
 * In the browser the channel is a WebSocket-to-TCP proxy in front of the
 * gateway; in tests it is a plain TCP socket. Both deliver whole lines.
 */

import { LineBuffer } from "./protocol.js";

export interface Transport {
  send(line: string): void;
  onLine(handler: (line: string) => void): void;
  onClose(handler: () => void): void;
  close(): void;
}

/** Browser transport: one text frame per envelope line. */
export class WebSocketTransport implements Transport {
  private ws: WebSocket;
  private buffer = new LineBuffer();
  private lineHandlers: Array<(line: string) => void> = [];
  private closeHandlers: Array<() => void> = [];
  private backlog: string[] = [];
  private open = false;

  constructor(url: string) {
    this.ws = new WebSocket(url);
    this.ws.addEventListener("open", () => {
      this.open = true;
      for (const line of this.backlog) this.ws.send(line);
      this.backlog = [];
    });
    this.ws.addEventListener("message", (e: MessageEvent) => {
      for (const line of this.buffer.push(String(e.data))) {
        for (const handler of this.lineHandlers) handler(line);
      }
    });
    this.ws.addEventListener("close", () => {
      for (const handler of this.closeHandlers) handler();
    });
  }

  send(line: string): void {
    if (this.open && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(line);
    } else {
      this.backlog.push(line);
    }
  }

  onLine(handler: (line: string) => void): void {
    this.lineHandlers.push(handler);
  }

  onClose(handler: () => void): void {
    this.closeHandlers.push(handler);
  }

  close(): void {
    this.ws.close();
  }
}

/** Test transport: speaks to the gateway's TCP port directly (node only). */
export async function connectTcp(host: string, port: number): Promise<Transport> {
  const net = await import("node:net");
  const socket: import("node:net").Socket = net.createConnection({ host, port });
  await new Promise<void>((resolve, reject) => {
    socket.once("connect", () => resolve());
    socket.once("error", (err: Error) => reject(err));
  });
  socket.setEncoding("utf-8");

  const buffer = new LineBuffer();
  const lineHandlers: Array<(line: string) => void> = [];
  const closeHandlers: Array<() => void> = [];
  socket.on("data", (chunk: string) => {
    for (const line of buffer.push(chunk)) {
      for (const handler of lineHandlers) handler(line);
    }
  });
  socket.on("close", () => {
    for (const handler of closeHandlers) handler();
  });
  socket.on("error", () => {
    /* surfaced via close */
  });

  return {
    send(line: string) {
      socket.write(line);
    },
    onLine(handler: (line: string) => void) {
      lineHandlers.push(handler);
    },
    onClose(handler: () => void) {
      closeHandlers.push(handler);
    },
    close() {
      socket.end();
      socket.destroy();
    },
  };
}
