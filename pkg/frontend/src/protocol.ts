/**
 * Line-oriented JSON protocol server on stdin/stdout.
 *
 * Requests:  {"id": <int>, "params": {"m": <int>, "n": <int>, "k": <int>}}
 * Responses: {"id": <int>, "score": <float>} on success,
 *            {"id": <int>, "error": "<message>"} on any failure.
 * The line {"cmd": "shutdown"} ends the process with exit code 0.
 *
 * Every request yields exactly one response; invalid parameters or dataset
 * problems are reported as error objects, never as crashes.  stdout carries
 * protocol lines only; diagnostics go to stderr.
 */

import * as readline from "readline";

export type Evaluate = (m: number, n: number, k: number) => Promise<number>;

function respond(obj: unknown): void {
  process.stdout.write(JSON.stringify(obj) + "\n");
}

export async function serve(evaluate: Evaluate): Promise<void> {
  const lines = readline.createInterface({ input: process.stdin, terminal: false });
  // Sequential handling: one request in flight at a time.
  const queue: string[] = [];
  let busy = false;
  let closed = false;

  const drain = async () => {
    if (busy) return;
    busy = true;
    while (queue.length > 0) {
      const line = queue.shift()!;
      await handle(line);
    }
    busy = false;
    if (closed) process.exit(0);
  };

  const handle = async (raw: string) => {
    const line = raw.trim();
    if (!line) return;
    let msg: any;
    try {
      msg = JSON.parse(line);
    } catch (err) {
      respond({ id: null, error: `malformed request: ${err}` });
      return;
    }
    if (msg && msg.cmd === "shutdown") {
      process.exit(0);
    }
    const id = msg && Number.isInteger(msg.id) ? msg.id : null;
    if (id === null) {
      respond({ id: null, error: "request is missing an integer id" });
      return;
    }
    const params = msg.params;
    if (!params || typeof params !== "object") {
      respond({ id, error: "request is missing params" });
      return;
    }
    const { m, n, k } = params;
    try {
      const score = await evaluate(m, n, k);
      if (!Number.isFinite(score)) {
        respond({ id, error: `evaluation produced non-finite score ${score}` });
      } else {
        respond({ id, score });
      }
    } catch (err) {
      respond({ id, error: String(err instanceof Error ? err.message : err) });
    }
  };

  lines.on("line", (line) => {
    queue.push(line);
    void drain();
  });
  await new Promise<void>((resolve) => {
    lines.on("close", () => {
      closed = true;
      if (!busy) resolve();
    });
  });
}
