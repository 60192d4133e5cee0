"""JSON network and PCP-instance files, plus the textual action syntax.

A network file looks like::

    {
      "participants": ["p", "q"],
      "messages": [{"payload": "a", "from": "p", "to": "q"}],
      "automata": {
        "p": {"states": [0, 1], "initial": 0,
              "transitions": [{"from": 0, "act": "!", "payload": "a", "peer": "q", "to": 1}]},
        "q": {"states": [0, 1], "initial": 0, "finals": [1],
              "transitions": [{"from": 0, "act": "?", "payload": "a", "peer": "p", "to": 1}]}
      },
      "final_mode": "all"
    }

``peer`` is the receiver of a send and the sender of a receive.  Actions
print as ``!a@p>q`` / ``?a@p>q`` (payload, sender, receiver).
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Union

import jsonschema

from .network import CommAction, CommunicatingAutomaton, Direction, FinalMode, Message, Network
from .pcp import PcpInstance


class ParseError(ValueError):
    def __init__(self, message: str, line: int = None, column: int = None):
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.column = column


_state = {"type": ["string", "integer"]}
_name = {"type": "string", "minLength": 1}

NETWORK_SCHEMA = {
    "type": "object",
    "required": ["participants", "messages", "automata"],
    "additionalProperties": False,
    "properties": {
        "participants": {"type": "array", "items": _name},
        "messages": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["payload", "from", "to"],
                "additionalProperties": False,
                "properties": {"payload": _name, "from": _name, "to": _name},
            },
        },
        "automata": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["initial", "transitions"],
                "additionalProperties": False,
                "properties": {
                    "states": {"type": "array", "items": _state},
                    "initial": _state,
                    "finals": {"type": "array", "items": _state},
                    "transitions": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["from", "act", "payload", "peer", "to"],
                            "additionalProperties": False,
                            "properties": {
                                "from": _state,
                                "act": {"enum": ["!", "?"]},
                                "payload": _name,
                                "peer": _name,
                                "to": _state,
                            },
                        },
                    },
                },
            },
        },
        "final_mode": {"enum": ["all", "declared"]},
    },
}

PCP_SCHEMA = {
    "type": "object",
    "required": ["alphabet", "w", "w_prime"],
    "additionalProperties": False,
    "properties": {
        "alphabet": {"type": "array", "items": _name},
        "w": {"type": "array", "items": {"type": ["string", "array"]}},
        "w_prime": {"type": "array", "items": {"type": ["string", "array"]}},
    },
}


def _load_json(text: str, schema: dict):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno) from None
    try:
        jsonschema.validate(data, schema)
    except jsonschema.ValidationError as e:
        path = "/".join(map(str, e.absolute_path)) or "<root>"
        raise ParseError(f"{path}: {e.message}") from None
    return data


def _text(source: Union[str, Path]) -> str:
    return Path(source).read_text(encoding="utf-8")


def network_from_dict(data: dict) -> Network:
    automata = {}
    for p, entry in data["automata"].items():
        transitions = []
        for t in entry["transitions"]:
            if t["act"] == "!":
                action = CommAction.send(t["payload"], p, t["peer"])
            else:
                action = CommAction.receive(t["payload"], t["peer"], p)
            transitions.append((t["from"], action, t["to"]))
        automata[p] = CommunicatingAutomaton.create(
            transitions, entry["initial"], entry.get("finals", ()), entry.get("states", ()))
    messages = {Message(m["payload"], m["from"], m["to"]) for m in data["messages"]}
    return Network(tuple(data["participants"]), automata, messages,
                   FinalMode(data.get("final_mode", "all")))


def parse_network(text: str) -> Network:
    return network_from_dict(_load_json(text, NETWORK_SCHEMA))


def load_network(path: Union[str, Path]) -> Network:
    return parse_network(_text(path))


def _state_key(s):
    return (isinstance(s, str), s)


def network_to_dict(n: Network) -> dict:
    automata = {}
    for p in n.participants:
        a = n.automata[p]
        transitions = []
        for src, act, dst in sorted(a.transitions, key=lambda t: (_state_key(t[0]), str(t[1]),
                                                                   _state_key(t[2]))):
            peer = act.message.receiver if act.is_send else act.message.sender
            transitions.append({"from": src, "act": act.direction.value,
                                "payload": act.message.payload, "peer": peer, "to": dst})
        entry = {"states": sorted(a.states, key=_state_key), "initial": a.initial,
                 "transitions": transitions}
        if a.finals:
            entry["finals"] = sorted(a.finals, key=_state_key)
        automata[p] = entry
    return {
        "participants": list(n.participants),
        "messages": [{"payload": m.payload, "from": m.sender, "to": m.receiver}
                     for m in sorted(n.messages)],
        "automata": automata,
        "final_mode": n.final_mode.value,
    }


def dump_network(n: Network) -> str:
    return json.dumps(network_to_dict(n), indent=2) + "\n"


def parse_pcp(text: str) -> PcpInstance:
    data = _load_json(text, PCP_SCHEMA)
    try:
        return PcpInstance(data["alphabet"], data["w"], data["w_prime"])
    except ValueError as e:
        raise ParseError(str(e)) from None


def load_pcp(path: Union[str, Path]) -> PcpInstance:
    return parse_pcp(_text(path))


_TOKEN = re.compile(r"^([!?])([^@]+)@([^>]+)>(.+)$")


def parse_action(token: str) -> CommAction:
    m = _TOKEN.match(token.strip())
    if not m:
        raise ParseError(f"bad action token {token!r}, expected !payload@sender>receiver")
    direction, payload, sender, receiver = m.groups()
    return CommAction(Message(payload, sender, receiver), Direction(direction))


def parse_trace(text: str) -> tuple:
    return tuple(parse_action(t) for t in text.split())


def format_word(word) -> list:
    return [str(a) for a in word]
