"""The network front door: pairing, per-connection message handling,
leaderboard queries, questionnaire and feedback intake.

Speaks the v1 wire protocol over websocket text frames and answers plain
``GET /define?word=`` requests through the pluggable dictionary provider.
All game state lives in one event loop; engine calls are synchronous
between awaits, which makes enqueue/join/submit linearizable per session.
"""

from __future__ import annotations

import asyncio
import logging
import secrets
import time
from urllib.parse import parse_qs, urlparse

from websockets.asyncio.server import serve as ws_serve
from websockets.exceptions import ConnectionClosed

from . import assessments, datastore, protocol
from .dictionary import DictionaryProvider, LexiconDictionary
from .errors import GameRuleError, ProtocolError
from .lobby import Leaderboard, Lobby, PlayerConnection, validate_feedback
from .session import (
    AbandonReason,
    RoundResult,
    RoundStarted,
    Session,
    SessionAbandoned,
    SessionCompleted,
    SessionState,
    WordShared,
)
from .util import derive_seed

log = logging.getLogger(__name__)

DEFAULT_SELECTION_TIMEOUT = 120.0
DEFAULT_SHARE_TIMEOUT = 60.0
DEFAULT_QUEUE_TIMEOUT = 600.0
DEFAULT_DRAIN_TIMEOUT = 30.0
MAX_ALIAS_LENGTH = 32
LEADERBOARD_DEFAULT_N = 10


class _Client:
    def __init__(self, conn: PlayerConnection, ws):
        self.conn = conn
        self.ws = ws
        self.send_lock = asyncio.Lock()
        self.last_session_id: str | None = None


class _LiveSession:
    def __init__(self, session: Session, aliases: dict):
        self.session = session
        self.aliases = aliases
        self.started_at = time.time()
        self.timer: asyncio.Task | None = None


class GameServer:
    def __init__(self, themes, embeddings, store: datastore.Datastore,
                 dictionary: DictionaryProvider | None = None,
                 selection_timeout: float = DEFAULT_SELECTION_TIMEOUT,
                 share_timeout: float = DEFAULT_SHARE_TIMEOUT,
                 queue_timeout: float = DEFAULT_QUEUE_TIMEOUT,
                 drain_timeout: float = DEFAULT_DRAIN_TIMEOUT):
        self.themes = themes
        self.embeddings = embeddings
        self.store = store
        self.dictionary = dictionary or LexiconDictionary(themes)
        self.selection_timeout = selection_timeout
        self.share_timeout = share_timeout
        self.queue_timeout = queue_timeout
        self.drain_timeout = drain_timeout
        self.lobby = Lobby()
        self.leaderboard = Leaderboard()
        self.clients: dict[str, _Client] = {}         # player_id -> client
        self.live: dict[str, _LiveSession] = {}       # session_id -> live state
        self.player_session: dict[str, str] = {}      # player_id -> session_id
        self.bound_port: int | None = None

    # -- plumbing ------------------------------------------------------

    async def _send(self, player_id: str, frame: str) -> None:
        client = self.clients.get(player_id)
        if client is None:
            return
        try:
            async with client.send_lock:
                await client.ws.send(frame)
        except ConnectionClosed:
            pass

    async def _send_error(self, ws, exc: Exception) -> None:
        code = getattr(exc, "code", "error")
        try:
            await ws.send(protocol.error(code, str(exc)))
        except ConnectionClosed:
            pass

    def _process_request(self, connection, request):
        parsed = urlparse(request.path)
        if parsed.path == "/define":
            word = (parse_qs(parsed.query).get("word") or [""])[0]
            definition = self.dictionary.define(word) if word else None
            if definition is None:
                return connection.respond(404, "no definition found\n")
            return connection.respond(200, definition + "\n")
        return None  # anything else proceeds with the websocket handshake

    # -- session lifecycle ----------------------------------------------

    def _cancel_timer(self, live: _LiveSession) -> None:
        if live.timer is not None:
            live.timer.cancel()
            live.timer = None

    def _arm_timer(self, live: _LiveSession, seconds: float) -> None:
        # one timer slot per session: every phase change re-arms, so if this
        # task is still alive when it fires, the armed phase never finished
        # (a half-completed share step stays covered)
        self._cancel_timer(live)
        round_no = live.session.current_round

        async def fire():
            await asyncio.sleep(seconds)
            session = live.session
            if session.state in (SessionState.COMPLETED, SessionState.ABANDONED):
                return
            if session.current_round != round_no:
                return
            log.info("session %s timed out in %s", session.session_id,
                     session.state.value)
            try:
                await self._dispatch(live, session.abandon(AbandonReason.TIMEOUT))
            except Exception:
                log.exception("timeout handling failed for %s", session.session_id)

        live.timer = asyncio.create_task(fire())

    async def _start_session(self, a: PlayerConnection, b: PlayerConnection) -> None:
        session_id = secrets.token_hex(8)
        session = Session(
            session_id=session_id,
            players=(a.player_id, b.player_id),
            themes=self.themes,
            embeddings=self.embeddings,
            seed=derive_seed("live", session_id),
        )
        aliases = {a.player_id: a.display_alias, b.player_id: b.display_alias}
        live = _LiveSession(session, aliases)
        self.live[session_id] = live
        for pid in session.players:
            self.player_session[pid] = session_id
            if pid in self.clients:
                self.clients[pid].last_session_id = session_id
        await self._send(a.player_id, protocol.paired(session_id, b.display_alias))
        await self._send(b.player_id, protocol.paired(session_id, a.display_alias))
        await self._dispatch(live, session.start())

    def _finish_session(self, live: _LiveSession) -> None:
        session = live.session
        self._cancel_timer(live)
        self.live.pop(session.session_id, None)
        for pid in session.players:
            self.player_session.pop(pid, None)
        self.lobby.release(*session.players)
        record = datastore.session_record(session, live.started_at, time.time())
        self.store.append(record)

    async def _dispatch(self, live: _LiveSession, events) -> None:
        session = live.session
        for event in events:
            if isinstance(event, RoundStarted):
                for pid in session.players:
                    await self._send(pid, protocol.round_started(
                        event.round_no, event.spec.theme, event.spec.keyword,
                        event.orders[pid], event.spec.quota))
                self._arm_timer(live, self.selection_timeout)
            elif isinstance(event, RoundResult):
                frame = protocol.round_result(
                    event.round_no, event.matched, float(event.wcmr),
                    event.points, event.streak, event.bonus, event.total)
                for pid in session.players:
                    await self._send(pid, frame)
                self._arm_timer(live, self.share_timeout)
            elif isinstance(event, WordShared):
                partner = session.partner_of(event.player)
                await self._send(partner, protocol.word_shared(event.word))
            elif isinstance(event, SessionCompleted):
                completed_at = time.time()
                self._finish_session(live)
                for pid in session.players:
                    self.leaderboard.record_completion(
                        pid, live.aliases[pid], session.session_id,
                        event.total, completed_at)
                for pid in session.players:
                    await self._send(pid, protocol.session_completed(
                        event.total, self.leaderboard.rank_of(pid)))
            elif isinstance(event, SessionAbandoned):
                self._finish_session(live)
                for pid in session.players:
                    await self._send(pid, protocol.session_abandoned(event.reason.value))

    # -- message handling -----------------------------------------------

    def _live_for(self, player_id: str, msg: dict) -> _LiveSession:
        session_id = protocol.require(msg, "session_id", str)
        live = self.live.get(session_id)
        if live is None or player_id not in live.session.players:
            raise ProtocolError(f"no live session {session_id!r} for this player")
        round_no = protocol.require(msg, "round_no", int)
        if round_no != live.session.current_round:
            raise ProtocolError(
                f"round {round_no} is not the current round "
                f"({live.session.current_round})")
        return live

    async def _handle_message(self, client: _Client, msg: dict) -> None:
        kind = msg["type"]
        player_id = client.conn.player_id
        if kind == "join_queue":
            partner = self.lobby.enqueue(client.conn)
            if partner is not None:
                await self._start_session(partner, client.conn)
        elif kind == "join_tag":
            tag = protocol.require(msg, "tag", str)
            partner = self.lobby.join_tag(client.conn, tag)
            if partner is not None:
                await self._start_session(partner, client.conn)
        elif kind == "submit_selection":
            live = self._live_for(player_id, msg)
            words = protocol.require(msg, "words", list)
            events = live.session.submit_selection(player_id, words)
            await self._dispatch(live, events)
        elif kind == "share_word":
            live = self._live_for(player_id, msg)
            word = msg.get("word")
            if word is not None and not isinstance(word, str):
                raise ProtocolError("share_word: word must be a string when present")
            events = live.session.share_word(player_id, word)
            await self._dispatch(live, events)
        elif kind == "feedback":
            ratings = validate_feedback(protocol.require(msg, "ratings", dict),
                                        msg.get("comment"))
            self.store.append(datastore.feedback_record(
                player_id, ratings, msg.get("comment")))
        elif kind == "questionnaire":
            qkind = protocol.require(msg, "kind", str)
            session_id = protocol.require(msg, "session_id", str)
            items = protocol.require(msg, "items", list)
            if qkind == "urcs":
                assessments.URCSResponse(tuple(items))
            elif qkind == "bfi":
                assessments.BFIResponse(tuple(items))
            else:
                raise ProtocolError(f"unknown questionnaire kind {qkind!r}")
            if session_id not in self.live and session_id != client.last_session_id:
                raise ProtocolError(f"unknown session {session_id!r}")
            self.store.append(datastore.questionnaire_record(
                qkind, session_id, player_id, items))
        elif kind == "get_leaderboard":
            n = msg.get("n", LEADERBOARD_DEFAULT_N)
            if not isinstance(n, int) or n < 1:
                raise ProtocolError("get_leaderboard: n must be a positive integer")
            await self._send(player_id, protocol.leaderboard(self.leaderboard.top(n)))
        else:
            raise ProtocolError(f"unexpected message type {kind!r}")

    async def handler(self, ws) -> None:
        client: _Client | None = None
        try:
            async for raw in ws:
                try:
                    msg = protocol.expect_client_message(raw)
                    if client is None:
                        if msg["type"] != "hello":
                            raise ProtocolError("say hello before anything else")
                        alias = str(msg.get("alias") or "anon").strip()[:MAX_ALIAS_LENGTH] or "anon"
                        conn = PlayerConnection(
                            player_id=secrets.token_hex(16),  # 128-bit anonymous token
                            display_alias=alias, handle=ws)
                        client = _Client(conn, ws)
                        self.clients[conn.player_id] = client
                        await ws.send(protocol.welcome(conn.player_id, alias))
                    elif msg["type"] == "hello":
                        raise ProtocolError("already identified")
                    else:
                        await self._handle_message(client, msg)
                except (GameRuleError, ProtocolError) as exc:
                    await self._send_error(ws, exc)
        except ConnectionClosed:
            pass
        finally:
            if client is not None:
                await self._disconnect(client)

    async def _disconnect(self, client: _Client) -> None:
        player_id = client.conn.player_id
        self.clients.pop(player_id, None)
        self.lobby.leave(player_id)
        session_id = self.player_session.get(player_id)
        if session_id is not None:
            live = self.live.get(session_id)
            if live is not None and live.session.state not in (
                    SessionState.COMPLETED, SessionState.ABANDONED):
                await self._dispatch(live, live.session.abandon(AbandonReason.DISCONNECT))

    # -- running ---------------------------------------------------------

    async def _evict_loop(self) -> None:
        while True:
            await asyncio.sleep(min(30.0, self.queue_timeout))
            for conn in self.lobby.evict_stale(self.queue_timeout):
                await self._send(conn.player_id,
                                 protocol.error("queue_timeout", "matchmaking timed out"))

    async def run(self, host: str = "127.0.0.1", port: int = 0,
                  ready: asyncio.Event | None = None,
                  stop: asyncio.Event | None = None) -> None:
        stop = stop or asyncio.Event()
        async with ws_serve(self.handler, host, port,
                            process_request=self._process_request) as server:
            self.bound_port = server.sockets[0].getsockname()[1]
            evictor = asyncio.create_task(self._evict_loop())
            log.info("listening on %s:%d", host, self.bound_port)
            if ready is not None:
                ready.set()
            try:
                await stop.wait()
            finally:
                evictor.cancel()
                server.close(close_connections=False)
                deadline = time.monotonic() + self.drain_timeout
                while self.live and time.monotonic() < deadline:
                    await asyncio.sleep(0.2)
