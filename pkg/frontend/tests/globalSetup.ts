// Spawns the Python session service for the integration tests.

import { spawn, ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";

let proc: ChildProcess | null = null;

const PORT = 8441;

async function waitForService(url: string, attempts = 100): Promise<void> {
  for (let i = 0; i < attempts; i += 1) {
    try {
      const res = await fetch(url);
      if (res.status < 500) return;
    } catch {
      // not up yet
    }
    await new Promise((resolveSleep) => setTimeout(resolveSleep, 100));
  }
  throw new Error(`service did not come up at ${url}`);
}

export async function setup(): Promise<void> {
  const repoRoot = resolve(__dirname, "..", "..");
  proc = spawn("python3", ["-m", "ltc.cli", "serve", "--port", String(PORT)], {
    cwd: repoRoot,
    env: { ...process.env, PYTHONPATH: join(repoRoot, "src") },
    stdio: "inherit",
  });
  process.env.LTC_SERVICE_URL = `http://127.0.0.1:${PORT}`;
  await waitForService(`${process.env.LTC_SERVICE_URL}/sessions/none`);
}

export async function teardown(): Promise<void> {
  if (proc) {
    proc.kill("SIGTERM");
    proc = null;
  }
}
