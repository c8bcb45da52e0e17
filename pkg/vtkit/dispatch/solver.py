"""Driver for an external SMT-LIB solver reading the script on standard input."""
import asyncio
import hashlib
import logging
import shlex
from dataclasses import dataclass
from typing import List, Sequence, Union

from vtkit.errors import SolverError, SolverUnavailable

log = logging.getLogger(__name__)

ANSWERS = ("sat", "unsat", "unknown")
TIMEOUT = "timeout"


@dataclass(frozen=True)
class SolverAnswer:
    verdict: str
    transcript: str

    @property
    def digest(self) -> str:
        return transcript_digest(self.transcript)

    @property
    def proved(self) -> bool:
        return self.verdict == "unsat"


def transcript_digest(transcript: str) -> str:
    return "sha256:" + hashlib.sha256(transcript.encode()).hexdigest()


def _transcript(script: str, out: str, err: str) -> str:
    parts = [script, ";; stdout", out]
    if err:
        parts += [";; stderr", err]
    return "\n".join(parts)


def parse_answer(out: str) -> str:
    """The first sat/unsat/unknown line; raises ValueError on solver errors."""
    for line in out.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("(error"):
            raise ValueError(line)
        if line in ANSWERS:
            return line
    raise ValueError("no sat/unsat/unknown answer in solver output")


class SmtSolver:
    def __init__(self, cmd: str, timeout: float = 10.0, jobs: int = 1):
        self.argv = shlex.split(cmd)
        if not self.argv:
            raise SolverUnavailable("empty solver command")
        self.timeout = timeout
        self.jobs = jobs

    async def check(self, script: str) -> SolverAnswer:
        try:
            proc = await asyncio.create_subprocess_exec(
                *self.argv,
                stdin=asyncio.subprocess.PIPE,
                stdout=asyncio.subprocess.PIPE,
                stderr=asyncio.subprocess.PIPE,
            )
        except (FileNotFoundError, PermissionError) as e:
            raise SolverUnavailable(f"cannot start solver {self.argv[0]}: {e}") from None
        try:
            out, err = await asyncio.wait_for(proc.communicate(script.encode()), self.timeout)
        except asyncio.TimeoutError:
            proc.kill()
            await proc.wait()
            log.info("solver timed out after %ss", self.timeout)
            return SolverAnswer(TIMEOUT, _transcript(script, "", f"timeout after {self.timeout}s"))
        stdout, stderr = out.decode(errors="replace"), err.decode(errors="replace")
        transcript = _transcript(script, stdout, stderr)
        try:
            verdict = parse_answer(stdout)
        except ValueError as e:
            raise SolverError(f"solver failed (exit {proc.returncode}): {e}", transcript) from None
        log.debug("solver answered %s", verdict)
        return SolverAnswer(verdict, transcript)

    async def check_all(self, scripts: Sequence[str]) -> List[Union[SolverAnswer, Exception]]:
        """Run up to `jobs` solver processes at once; results follow the input order."""
        sem = asyncio.Semaphore(self.jobs)

        async def one(script: str):
            async with sem:
                return await self.check(script)

        return await asyncio.gather(*(one(s) for s in scripts), return_exceptions=True)

    def run_all(self, scripts: Sequence[str]) -> List[Union[SolverAnswer, Exception]]:
        if not scripts:
            return []
        return asyncio.run(self.check_all(scripts))
