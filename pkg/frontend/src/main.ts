/** Browser bootstrap: connect, authenticate, mount the UI.
 *
 * Configuration is a single endpoint URL (?server=ws://host:port); the
 * endpoint is a WebSocket proxy in front of the gateway's TCP port.
 */

import { LessonClient } from "./client.js";
import { WebSocketTransport } from "./transport.js";
import { mount } from "./ui.js";

function param(name: string, fallback: string): string {
  return new URLSearchParams(window.location.search).get(name) ?? fallback;
}

export function start(): void {
  const url = param("server", "ws://127.0.0.1:7701");
  const client = new LessonClient(new WebSocketTransport(url));
  mount(document.getElementById("app")!, client);

  const userId = param("user", "");
  const token = param("token", "tok");
  const native = param("native", "en");
  if (userId) {
    client
      .auth(userId, token, { native })
      .then(() => client.setPresence("available"))
      .catch(() => {
        /* the reducer already queued the error notification */
      });
  }
}

if (typeof document !== "undefined") {
  start();
}
