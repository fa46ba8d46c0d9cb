/** Spawning and workspace plumbing for driving the benchmark CLI. */

import { spawn } from "node:child_process";
import { mkdtemp, rm } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";

/**
 * Command used to invoke the benchmark CLI. Override with the KPBENCH_CLI
 * environment variable (whitespace-separated, e.g. "python3 -m kpbench.cli").
 */
export function cliCommand(): string[] {
  const raw = process.env.KPBENCH_CLI ?? "kpbench";
  const parts = raw.split(/\s+/).filter((p) => p.length > 0);
  if (parts.length === 0) {
    throw new Error("KPBENCH_CLI is set but empty");
  }
  return parts;
}

export class CliError extends Error {
  constructor(
    message: string,
    public readonly exitCode: number | null,
    public readonly stderr: string
  ) {
    super(`${message}${stderr ? `: ${stderr.trim()}` : ""}`);
    this.name = "CliError";
  }
}

export function runCli(args: string[]): Promise<void> {
  const [command, ...prefix] = cliCommand();
  return new Promise((resolve, reject) => {
    const child = spawn(command, [...prefix, ...args], {
      stdio: ["ignore", "ignore", "pipe"],
    });
    let stderr = "";
    child.stderr.on("data", (part) => {
      stderr += String(part);
    });
    child.on("error", (err) => {
      reject(new CliError(`failed to launch benchmark CLI (${command})`, null, String(err)));
    });
    child.on("close", (code) => {
      if (code === 0) {
        resolve();
      } else {
        reject(new CliError("benchmark CLI failed", code, stderr));
      }
    });
  });
}

export async function withWorkspace<T>(fn: (dir: string) => Promise<T>): Promise<T> {
  const dir = await mkdtemp(join(tmpdir(), "kpbench-bind-"));
  try {
    return await fn(dir);
  } finally {
    await rm(dir, { recursive: true, force: true });
  }
}
