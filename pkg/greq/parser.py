"""Recursive-descent parser for ``.greq`` requirement models.

Parsing happens in two passes. The first builds a raw declaration tree that keeps
the token of every name, recovering from syntax errors by skipping to the next
top-level keyword. The second pass resolves every reference against the
declarations (which may appear in any order) and builds the immutable
:class:`~greq.model.Model`.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from .lexer import Token, TokenKind, lex
from .model import (
    Action,
    Agent,
    Attribute,
    AttributeKind,
    Entity,
    MAX_GOAL_DEPTH,
    Goal,
    Model,
    Organization,
    Privilege,
    Relationship,
    Step,
)
from .source import ParseError

logger = logging.getLogger(__name__)

DECLARATION_KEYWORDS = ("organization", "goal", "entity", "relationship", "privilege")
# Keywords that never appear nested; recovery may stop on them at any depth.
FLAT_KEYWORDS = frozenset({"organization", "entity", "relationship", "privilege"})
ATTRIBUTE_KINDS = {kind.value: kind for kind in AttributeKind}
ACTIONS = {action.value: action for action in Action}


@dataclass
class ParseResult:
    model: Optional[Model]
    errors: List[ParseError] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.model is not None and not self.errors


@dataclass
class _RawOrganization:
    name: Token
    agents: List[Token]


@dataclass
class _RawGoal:
    name: Token
    responsible: Optional[Token] = None
    entry: Optional[Token] = None
    children: Optional[List["_RawGoal"]] = None


@dataclass
class _RawEntity:
    name: Token
    attributes: List[Tuple[Token, AttributeKind]]


@dataclass
class _RawRelationship:
    name: Token
    source: Token
    target: Token


@dataclass
class _RawStep:
    entity: Token
    via: Optional[Token]
    actions: Dict[Action, Token]
    updated: List[Token]


@dataclass
class _RawPrivilege:
    goal: Token
    entry: _RawStep
    steps: List[_RawStep]


@dataclass
class _RawModel:
    organizations: List[_RawOrganization] = field(default_factory=list)
    goals: List[_RawGoal] = field(default_factory=list)
    entities: List[_RawEntity] = field(default_factory=list)
    relationships: List[_RawRelationship] = field(default_factory=list)
    privileges: List[_RawPrivilege] = field(default_factory=list)


class _Bail(Exception):
    def __init__(self, error: ParseError):
        super().__init__(error.message)
        self.error = error


class _Parser:
    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.pos = 0
        self.depth = 0
        self.errors: List[ParseError] = []
        self.raw = _RawModel()
        self.declarations: Dict[str, Callable[[], None]] = {
            "organization": self._organization,
            "goal": lambda: self.raw.goals.append(self._goal()),
            "entity": self._entity,
            "relationship": self._relationship,
            "privilege": self._privilege,
        }

    # -- token helpers -------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        if token.kind is not TokenKind.EOF:
            self.pos += 1
        return token

    def at_keyword(self, *words: str) -> bool:
        token = self.peek()
        return token.kind is TokenKind.NAME and token.value in words

    def fail(self, *expected: str) -> _Bail:
        token = self.peek()
        wanted = " or ".join(expected)
        message = f"expected {wanted}, found {token.describe()}"
        return _Bail(ParseError(token.span, message, tuple(expected)))

    def expect(self, kind: TokenKind) -> Token:
        if self.peek().kind is not kind:
            raise self.fail(kind.value)
        token = self.advance()
        if kind is TokenKind.LBRACE:
            self.depth += 1
        elif kind is TokenKind.RBRACE:
            self.depth -= 1
        return token

    def expect_keyword(self, word: str) -> Token:
        if not self.at_keyword(word):
            raise self.fail(f"'{word}'")
        return self.advance()

    def expect_name(self, role: str) -> Token:
        token = self.peek()
        if not token.is_name:
            raise self.fail(role)
        if not token.value:
            raise _Bail(ParseError(token.span, f"{role} must not be empty", (role,)))
        return self.advance()

    # -- recovery ------------------------------------------------------

    def synchronize(self, start: int) -> None:
        """Skip to the next declaration keyword, always consuming at least one token."""
        if self.pos == start:
            self.advance()
        while self.peek().kind is not TokenKind.EOF:
            token = self.peek()
            if token.kind is TokenKind.NAME and (
                token.value in FLAT_KEYWORDS or (token.value == "goal" and self.depth <= 0)
            ):
                break
            if token.kind is TokenKind.LBRACE:
                self.depth += 1
            elif token.kind is TokenKind.RBRACE:
                self.depth -= 1
            self.advance()
        self.depth = 0

    # -- grammar -------------------------------------------------------

    def parse(self) -> _RawModel:
        while self.peek().kind is not TokenKind.EOF:
            start = self.pos
            try:
                token = self.peek()
                handler = self.declarations.get(token.value) if token.kind is TokenKind.NAME else None
                if handler is None:
                    raise self.fail(*(f"'{word}'" for word in DECLARATION_KEYWORDS))
                handler()
            except _Bail as bail:
                self.errors.append(bail.error)
                self.synchronize(start)
        return self.raw

    def _organization(self) -> None:
        self.expect_keyword("organization")
        name = self.expect_name("organization name")
        self.expect(TokenKind.LBRACE)
        agents: List[Token] = []
        while self.peek().kind is not TokenKind.RBRACE:
            if not self.at_keyword("agent"):
                raise self.fail("'agent'", "'}'")
            self.advance()
            agents.append(self.expect_name("agent name"))
        self.expect(TokenKind.RBRACE)
        self.raw.organizations.append(_RawOrganization(name, agents))

    def _goal(self, level: int = 1) -> _RawGoal:
        keyword = self.expect_keyword("goal")
        if level > MAX_GOAL_DEPTH:
            raise _Bail(ParseError(keyword.span, f"goals nest deeper than {MAX_GOAL_DEPTH} levels"))
        goal = _RawGoal(self.expect_name("goal name"))
        if self.peek().kind is not TokenKind.LBRACE:
            return goal
        self.expect(TokenKind.LBRACE)
        children: List[_RawGoal] = []
        has_properties = False
        while self.peek().kind is not TokenKind.RBRACE:
            if self.at_keyword("goal"):
                children.append(self._goal(level + 1))
            elif self.at_keyword("responsible", "entry"):
                keyword = self.advance()
                if getattr(goal, keyword.value) is not None:
                    raise _Bail(
                        ParseError(keyword.span, f"duplicate '{keyword.value}' property for goal")
                    )
                self.expect(TokenKind.COLON)
                role = "agent name" if keyword.value == "responsible" else "entity name"
                setattr(goal, keyword.value, self.expect_name(role))
                has_properties = True
            else:
                raise self.fail("'responsible'", "'entry'", "'goal'", "'}'")
        self.expect(TokenKind.RBRACE)
        if children or not has_properties:
            goal.children = children
        return goal

    def _entity(self) -> None:
        self.expect_keyword("entity")
        name = self.expect_name("entity name")
        self.expect(TokenKind.LBRACE)
        attributes: List[Tuple[Token, AttributeKind]] = []
        while self.peek().kind is not TokenKind.RBRACE:
            if not self.at_keyword("attribute"):
                raise self.fail("'attribute'", "'}'")
            self.advance()
            attribute = self.expect_name("attribute name")
            self.expect(TokenKind.COLON)
            if not self.at_keyword(*ATTRIBUTE_KINDS):
                raise self.fail(*(f"'{kind}'" for kind in ATTRIBUTE_KINDS))
            attributes.append((attribute, ATTRIBUTE_KINDS[self.advance().value]))
        self.expect(TokenKind.RBRACE)
        self.raw.entities.append(_RawEntity(name, attributes))

    def _relationship(self) -> None:
        self.expect_keyword("relationship")
        name = self.expect_name("relationship name")
        self.expect(TokenKind.COLON)
        source = self.expect_name("source entity")
        self.expect(TokenKind.ARROW)
        target = self.expect_name("target entity")
        self.raw.relationships.append(_RawRelationship(name, source, target))

    def _privilege(self) -> None:
        self.expect_keyword("privilege")
        self.expect_keyword("for")
        goal = self.expect_name("goal name")
        self.expect(TokenKind.LBRACE)
        self.expect_keyword("entry")
        entry_entity = self.expect_name("entity name")
        entry = self._actions(entry_entity, None)
        steps: List[_RawStep] = []
        while self.peek().kind is not TokenKind.RBRACE:
            if not self.at_keyword("step"):
                raise self.fail("'step'", "'}'")
            self.advance()
            via = self.expect_name("relationship name")
            self.expect(TokenKind.ARROW)
            entity = self.expect_name("entity name")
            steps.append(self._actions(entity, via))
        self.expect(TokenKind.RBRACE)
        self.raw.privileges.append(_RawPrivilege(goal, entry, steps))

    def _actions(self, entity: Token, via: Optional[Token]) -> _RawStep:
        step = _RawStep(entity, via, {}, [])
        self.expect(TokenKind.LBRACE)
        while True:
            if not self.at_keyword(*ACTIONS):
                raise self.fail(*(f"'{action}'" for action in ACTIONS))
            token = self.advance()
            action = ACTIONS[token.value]
            if action in step.actions:
                raise _Bail(ParseError(token.span, f"duplicate action '{action.value}'"))
            step.actions[action] = token
            if action is Action.UPDATE and self.peek().kind is TokenKind.LPAREN:
                self.advance()
                step.updated.append(self.expect_name("attribute name"))
                while self.peek().kind is TokenKind.COMMA:
                    self.advance()
                    step.updated.append(self.expect_name("attribute name"))
                self.expect(TokenKind.RPAREN)
            if self.peek().kind is not TokenKind.COMMA:
                break
            self.advance()
        self.expect(TokenKind.RBRACE)
        return step


class _Resolver:
    """Second pass: declaration tables, reference checks and model construction."""

    def __init__(self, raw: _RawModel):
        self.raw = raw
        self.errors: List[ParseError] = []
        self.agents: Dict[str, Token] = {}
        self.goals: Dict[str, _RawGoal] = {}
        self.entities: Dict[str, _RawEntity] = {}
        self.relationships: Dict[str, Token] = {}

    def _declare(self, table: Dict, kind: str, token: Token, value) -> None:
        first = table.get(token.value)
        if first is not None:
            first_token = first if isinstance(first, Token) else first.name
            self.errors.append(
                ParseError(
                    token.span,
                    f"duplicate {kind} '{token.value}' (first declared at {first_token.span.location()})",
                    related=first_token.span,
                )
            )
            return
        table[token.value] = value

    def _unknown(self, kind: str, token: Token) -> None:
        self.errors.append(ParseError(token.span, f"unknown {kind} '{token.value}'"))

    def collect(self) -> None:
        organizations: Dict[str, Token] = {}
        for organization in self.raw.organizations:
            self._declare(organizations, "organization", organization.name, organization.name)
            for agent in organization.agents:
                self._declare(self.agents, "agent", agent, agent)

        stack = list(reversed(self.raw.goals))
        while stack:
            goal = stack.pop()
            self._declare(self.goals, "goal", goal.name, goal)
            stack.extend(reversed(goal.children or []))

        for entity in self.raw.entities:
            self._declare(self.entities, "entity", entity.name, entity)
            attributes: Dict[str, Token] = {}
            for attribute, _ in entity.attributes:
                self._declare(attributes, f"attribute of entity '{entity.name.value}'", attribute, attribute)

        for relationship in self.raw.relationships:
            self._declare(self.relationships, "relationship", relationship.name, relationship.name)

    def check_references(self) -> None:
        for goal in self.goals.values():
            if goal.responsible is not None and goal.responsible.value not in self.agents:
                self._unknown("agent", goal.responsible)
            if goal.entry is not None and goal.entry.value not in self.entities:
                self._unknown("entity", goal.entry)

        for relationship in self.raw.relationships:
            for end in (relationship.source, relationship.target):
                if end.value not in self.entities:
                    self._unknown("entity", end)

        for privilege in self.raw.privileges:
            goal = self.goals.get(privilege.goal.value)
            if goal is None:
                self._unknown("goal", privilege.goal)
            elif goal.children is not None:
                self.errors.append(
                    ParseError(
                        privilege.goal.span,
                        f"goal '{privilege.goal.value}' is decomposed; privileges attach to leaf goals only",
                    )
                )
            for step in [privilege.entry] + privilege.steps:
                if step.via is not None and step.via.value not in self.relationships:
                    self._unknown("relationship", step.via)
                entity = self.entities.get(step.entity.value)
                if entity is None:
                    self._unknown("entity", step.entity)
                    continue
                known = {attribute.value for attribute, _ in entity.attributes}
                for attribute in step.updated:
                    if attribute.value not in known:
                        self.errors.append(
                            ParseError(
                                attribute.span,
                                f"entity '{entity.name.value}' has no attribute '{attribute.value}'",
                            )
                        )

    def build(self, source_name: str) -> Model:
        return Model(
            source_name=source_name,
            organizations=tuple(
                Organization(org.name.value, tuple(Agent(agent.value) for agent in org.agents))
                for org in self.raw.organizations
            ),
            goals=tuple(_build_goal(goal) for goal in self.raw.goals),
            entities=tuple(
                Entity(
                    entity.name.value,
                    tuple(Attribute(attribute.value, kind) for attribute, kind in entity.attributes),
                )
                for entity in self.raw.entities
            ),
            relationships=tuple(
                Relationship(rel.name.value, rel.source.value, rel.target.value)
                for rel in self.raw.relationships
            ),
            privileges=tuple(
                Privilege(
                    goal=privilege.goal.value,
                    entry_step=_build_step(privilege.entry),
                    steps=tuple(_build_step(step) for step in privilege.steps),
                )
                for privilege in self.raw.privileges
            ),
        )


def _build_goal(raw: _RawGoal) -> Goal:
    return Goal(
        name=raw.name.value,
        responsible=raw.responsible.value if raw.responsible else None,
        entry=raw.entry.value if raw.entry else None,
        children=None if raw.children is None else tuple(_build_goal(child) for child in raw.children),
    )


def _build_step(raw: _RawStep) -> Step:
    return Step(
        entity=raw.entity.value,
        via=raw.via.value if raw.via else None,
        actions=frozenset(raw.actions),
        updated_attributes=tuple(token.value for token in raw.updated),
    )


def _ordered(errors: List[ParseError]) -> List[ParseError]:
    return sorted(errors, key=lambda error: (error.span.line, error.span.column))


def parse_source(source: str, file_name: str) -> ParseResult:
    """Parse and resolve a ``.greq`` source text.

    Returns every lexical and syntax error found by statement-level recovery.
    Name resolution runs only on syntactically clean input, so that a broken
    declaration does not cascade into spurious unknown-name errors.
    """
    tokens, lex_errors = lex(source, file_name)
    parser = _Parser(tokens)
    raw = parser.parse()
    syntax_errors = lex_errors + parser.errors
    if syntax_errors:
        logger.debug("%s: %d syntax error(s)", file_name, len(syntax_errors))
        return ParseResult(None, _ordered(syntax_errors))

    resolver = _Resolver(raw)
    resolver.collect()
    resolver.check_references()
    if resolver.errors:
        logger.debug("%s: %d resolution error(s)", file_name, len(resolver.errors))
        return ParseResult(None, _ordered(resolver.errors))

    model = resolver.build(file_name)
    logger.debug(
        "parsed %s: %d goal root(s), %d entit(ies), %d privilege(s)",
        file_name,
        len(model.goals),
        len(model.entities),
        len(model.privileges),
    )
    return ParseResult(model)


