#!/usr/bin/env python3
"""One-off generator for the prompt-rendering golden files.

Builds the expected rendered prompts by plain string substitution over the
prompt templates, entirely independently of the C++ implementation, so the
unit tests can byte-compare library output against files this script froze.

The canonical template text lives in fenced code blocks of a source document
(identified by their fixed first lines); pass that document's path to
regenerate the goldens:

    python3 tests/golden/make_goldens.py <source-document.md>

The checked-in golden files are frozen; regenerating them is only ever needed
if the canonical template text itself changes.
"""
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[2]
OUT = ROOT / "tests" / "golden"

TAU_FIRST_LINE = (
    "You are a helpful assistant. Your job is to create knowledge regarding "
    "any given artificial or natural system description by using an ontology "
    "named ‘SAPPhIRE’."
)
RHO_FIRST_LINE = (
    "You are a helpful assistant. Your task is to provide relevant information "
    "about any specified `SAPPhIRE` ontology construct related to a given "
    "artificial or natural system. You must use only the information provided "
    "to you in the `Context` section. Ensure that your responses are accurate, "
    "concise, and directly relevant to the query."
)


def fenced_blocks(markdown: str):
    """Yield the contents of ``` fenced blocks, outer blank lines stripped."""
    lines = markdown.split("\n")
    block = None
    for line in lines:
        if line.strip() == "```":
            if block is None:
                block = []
            else:
                yield "\n".join(block).strip("\n")
                block = None
        elif block is not None:
            block.append(line)


def load_templates(document: Path):
    text = document.read_text(encoding="utf-8")
    tau = rho = None
    for block in fenced_blocks(text):
        if block.startswith(TAU_FIRST_LINE):
            tau = block
        elif block.startswith(RHO_FIRST_LINE):
            rho = block
    assert tau is not None, "hypothetical-generation template block not found"
    assert rho is not None, "corrected-answer template block not found"
    # The source text writes the tail of the correction template with literal
    # " \n\n" markers at line ends; they denote paragraph breaks in the
    # rendered prompt. Replace marker + newline with a real blank line and
    # drop the space that precedes the marker.
    rho = rho.replace(" \\n\\n\n", "\n\n")
    assert "\\n" not in rho
    return tau, rho


def subst(template: str, mapping: dict) -> str:
    for token, value in mapping.items():
        placeholder = "{" + token + "}"
        assert placeholder in template, placeholder
        assert value, f"empty value for {token}"
        template = template.replace(placeholder, value)
    assert "{" not in template, template[template.index("{"):][:80]
    return template


def main():
    if len(sys.argv) != 2:
        sys.exit("usage: make_goldens.py <source-document.md>")
    tau_template, rho_template = load_templates(Path(sys.argv[1]))
    assets = ROOT / "assets"
    definitions = (assets / "construct_definitions.txt").read_text(encoding="utf-8")
    reasoning = (assets / "reasoning_steps.txt").read_text(encoding="utf-8")
    fmt = (assets / "format_instructions.txt").read_text(encoding="utf-8")

    tau = subst(tau_template, {
        "Definitions of the SAPPhIRE constructs": definitions,
        "System name": "solenoid valve",
        "Reasoning steps": reasoning,
        "Output format instructions": fmt,
    })
    (OUT / "tau_solenoid_valve.txt").write_bytes(tau.encode("utf-8"))

    # Example inputs for the corrected-answer prompt. The context string uses
    # the documented layout: each chunk prefixed with "[source: <title>]" on
    # its own line, chunks joined with "\n\n---\n\n".
    query = ("What state changes occur in the system during its operation? "
             "Mention the initial and final states of the properties involved.")
    hypothetical = ("The valve changes from a closed state to an open state "
                    "when the coil is energised.")
    context_str = (
        "[source: Solenoid valve]\n"
        "A solenoid valve is an electromechanically operated valve.\n\n"
        "---\n\n"
        "[source: Solenoid]\n"
        "A solenoid is a type of electromagnet formed by a helix of wire."
    )
    rho = subst(rho_template, {
        "Definitions of the SAPPhIRE constructs": definitions,
        "system name": "solenoid valve",
        "query": query,
        "hypothetical_answer": hypothetical,
        "context_str": context_str,
    })
    (OUT / "rho_state_change_solenoid_valve.txt").write_bytes(rho.encode("utf-8"))
    print("wrote", OUT / "tau_solenoid_valve.txt")
    print("wrote", OUT / "rho_state_change_solenoid_valve.txt")


if __name__ == "__main__":
    main()
