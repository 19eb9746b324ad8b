"""HTTP service over the project store.

Reads are side-effect free; every mutation requires an `If-Match`
header carrying the caller's last-seen revision and fails with 409 when
stale, which serializes writers per project. Responses are serialized
with a fixed JSON layout so the CLI's --json output and the wire bytes
agree.
"""

from __future__ import annotations

import json
import threading

from fastapi import FastAPI, Request, Response

from . import analysis, core_model, form_engine, svg_render, triage
from .core_model import (
    Citation,
    GroupEdit,
    Project,
    QualityAnswer,
    ResearchQuestion,
    Scope,
    TriageAction,
)
from .errors import (
    ConflictError,
    EmptyGroupError,
    MetaforgeError,
    NotFoundError,
    ParseError,
    ValidationError,
    VersionError,
)


class ProjectStore:
    """In-memory project registry with compare-and-set mutation.

    At most one project may be bound to a file path (`serve --project`);
    its snapshots are persisted after every successful mutation. Every
    mutation is appended to a per-project audit log.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._projects: dict[str, Project] = {}
        self._paths: dict[str, str] = {}
        self._audit: dict[str, list] = {}
        self._counter = 0

    def add(self, project: Project, path: str | None = None) -> str:
        with self._lock:
            self._counter += 1
            pid = f"p{self._counter}"
            self._projects[pid] = project
            if path:
                self._paths[pid] = path
            self._audit[pid] = []
            return pid

    def ids(self) -> list[str]:
        with self._lock:
            return list(self._projects)

    def get(self, project_id: str) -> Project:
        with self._lock:
            project = self._projects.get(project_id)
        if project is None:
            raise NotFoundError(f"unknown project {project_id!r}")
        return project

    def audit_log(self, project_id: str) -> list:
        self.get(project_id)
        with self._lock:
            return list(self._audit[project_id])

    def find_document(self, document_id: str) -> tuple[str, Project]:
        """Resolve a bare document id to its project, in creation order."""
        with self._lock:
            items = list(self._projects.items())
        for pid, project in items:
            if any(d.id == document_id for d in project.documents):
                return pid, project
        raise NotFoundError(f"unknown document {document_id!r}")

    def mutate(self, project_id: str, expected_revision: int, op_name: str, fn) -> Project:
        with self._lock:
            project = self._projects.get(project_id)
            if project is None:
                raise NotFoundError(f"unknown project {project_id!r}")
            if project.revision != expected_revision:
                raise ConflictError(
                    f"revision {expected_revision} is stale; project is at "
                    f"{project.revision}", expected=expected_revision,
                    actual=project.revision)
            updated = fn(project)
            self._projects[project_id] = updated
            self._audit[project_id].append(
                {"op": op_name, "revision": updated.revision})
            path = self._paths.get(project_id)
        if path:
            core_model.save_project(updated, path)
        return updated


def _json_response(payload, status_code: int = 200) -> Response:
    return Response(content=json.dumps(payload, indent=2) + "\n",
                    media_type="application/json", status_code=status_code)


def _error_response(status: int, message: str, ids=None) -> Response:
    body = {"detail": message}
    if ids:
        body["ids"] = list(ids)
    return _json_response(body, status_code=status)


def _required_revision(request: Request) -> int:
    value = request.headers.get("if-match")
    if value is None:
        raise _PreconditionRequired()
    try:
        return int(value.strip().strip('"'))
    except ValueError:
        raise ValidationError(f"If-Match must carry a revision integer, got {value!r}")


class _PreconditionRequired(Exception):
    pass


def _project_payload(pid: str, project: Project) -> dict:
    payload = core_model.project_to_dict(project)
    payload["id"] = pid
    payload["question_text"] = project.question.text()
    return payload


def _document_payload(project: Project, document_id: str) -> dict:
    doc = core_model.document_by_id(project, document_id)
    return {
        "id": doc.id,
        "citation": {"authors": doc.citation.authors, "year": doc.citation.year,
                     "title": doc.citation.title},
        "file_ref": doc.file_ref,
        "review_status": doc.review_status,
        "provisionally_included": doc.provisionally_included,
        "duplicate_of": doc.duplicate_of,
        "label": doc.citation.label(),
    }


def _schema_payload() -> dict:
    schema = form_engine.load_default_schema()
    return {
        "extraction": [
            {
                "id": q.id,
                "section": q.section,
                "prompt": q.prompt,
                "answer_kind": q.answer_kind,
                "options": list(q.options),
                "show_if": [[cid, val] for cid, val in q.show_if],
                "mandatory": q.mandatory,
                "qa_link": q.qa_link,
                "manual": q.manual,
            }
            for q in schema.questions
        ],
        "quality": [
            {"id": q.id, "table_kind": q.table_kind, "prompt": q.prompt,
             "extraction_link": q.extraction_link}
            for q in schema.quality_questions
        ],
    }


def create_app(store: ProjectStore | None = None) -> FastAPI:
    store = store or ProjectStore()
    app = FastAPI(title="metaforge", docs_url=None, redoc_url=None)
    app.state.store = store

    # The browser UI may be statically hosted elsewhere; the service is
    # single-user and unauthenticated, so a permissive CORS policy is fine.
    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    @app.exception_handler(_PreconditionRequired)
    async def _precondition(request, exc):
        return _error_response(428, "mutations require an If-Match header "
                                    "carrying the project revision")

    @app.exception_handler(MetaforgeError)
    async def _domain_error(request, exc: MetaforgeError):
        if isinstance(exc, NotFoundError):
            return _error_response(404, str(exc))
        if isinstance(exc, ConflictError):
            return _error_response(409, str(exc))
        if isinstance(exc, (ValidationError,)):
            return _error_response(422, str(exc), getattr(exc, "ids", None))
        if isinstance(exc, (VersionError, ParseError, EmptyGroupError)):
            return _error_response(422, str(exc))
        return _error_response(500, str(exc))

    # -- projects ---------------------------------------------------------

    @app.post("/projects")
    async def create_project(request: Request):
        body = await request.json()
        question = ResearchQuestion(
            intervention=body.get("intervention", ""),
            outcome=body.get("outcome", ""),
            topic=body.get("topic", ""),
        )
        project = core_model.create_project(question)
        pid = store.add(project)
        return _json_response(_project_payload(pid, project), status_code=201)

    @app.get("/projects")
    async def list_projects():
        out = []
        for pid in store.ids():
            project = store.get(pid)
            out.append({"id": pid, "revision": project.revision,
                        "question_text": project.question.text()})
        return _json_response(out)

    @app.get("/projects/{pid}")
    async def get_project(pid: str):
        return _json_response(_project_payload(pid, store.get(pid)))

    @app.get("/projects/{pid}/schema")
    async def get_schema(pid: str):
        store.get(pid)
        return _json_response(_schema_payload())

    @app.get("/projects/{pid}/scope")
    async def get_scope(pid: str):
        project = store.get(pid)
        return _json_response({
            "criteria": list(project.scope.criteria),
            "confounders": list(project.scope.confounders),
            "target_context": project.scope.target_context,
            "revision": project.revision,
        })

    @app.put("/projects/{pid}/scope")
    async def put_scope(pid: str, request: Request):
        revision = _required_revision(request)
        body = await request.json()
        scope = Scope(criteria=list(body.get("criteria", [])),
                      confounders=list(body.get("confounders", [])),
                      target_context=body.get("target_context", ""))
        project = store.mutate(pid, revision, "update_scope",
                               lambda p: core_model.update_scope(p, scope))
        return _json_response({
            "criteria": list(project.scope.criteria),
            "confounders": list(project.scope.confounders),
            "target_context": project.scope.target_context,
            "revision": project.revision,
        })

    # -- documents --------------------------------------------------------

    @app.post("/projects/{pid}/documents")
    async def add_document(pid: str, request: Request):
        revision = _required_revision(request)
        body = await request.json()
        cit = body.get("citation") or {}
        citation = Citation(authors=cit.get("authors", ""), year=cit.get("year", 0),
                            title=cit.get("title", ""))
        created: list = []

        def op(p: Project) -> Project:
            updated, doc = core_model.add_document(p, citation, body.get("file_ref"))
            created.append(doc.id)
            return updated

        project = store.mutate(pid, revision, "add_document", op)
        payload = _document_payload(project, created[0])
        payload["revision"] = project.revision
        return _json_response(payload, status_code=201)

    @app.patch("/documents/{did}")
    async def patch_document(did: str, request: Request):
        pid, _ = store.find_document(did)
        revision = _required_revision(request)
        body = await request.json()

        def op(p: Project) -> Project:
            updated = p
            if "review_status" in body:
                updated = core_model.set_review_status(updated, did, body["review_status"])
            if "provisionally_included" in body:
                updated = core_model.set_inclusion(updated, did,
                                                   bool(body["provisionally_included"]))
            if updated is p:
                raise ValidationError(
                    "PATCH body must set review_status and/or provisionally_included")
            return updated

        project = store.mutate(pid, revision, "patch_document", op)
        payload = _document_payload(project, did)
        payload["revision"] = project.revision
        return _json_response(payload)

    @app.get("/documents/{did}/answers")
    async def get_answers(did: str):
        _, project = store.find_document(did)
        aset = project.answers.get(did) or core_model.AnswerSet()
        report = core_model.validate_document(project, did)
        try:
            table = form_engine.derive_evidence_table(aset.answers).to_dict()
        except MetaforgeError:
            table = None
        return _json_response({
            "answers": aset.answers,
            "results": [
                {"id": r.id, "label": r.label, "design": r.design,
                 "outcome_kind": r.outcome_kind, "effect_kind": r.effect_kind,
                 "data": r.data, "units": r.units}
                for r in aset.results
            ],
            "evidence_table": table,
            "validation": report.to_dict(),
            "revision": project.revision,
        })

    @app.put("/documents/{did}/answers")
    async def put_answers(did: str, request: Request):
        pid, _ = store.find_document(did)
        revision = _required_revision(request)
        body = await request.json()
        answers = body.get("answers") or {}
        results = body.get("results")
        project = store.mutate(
            pid, revision, "set_answers",
            lambda p: core_model.set_answers(p, did, answers, results))
        report = core_model.validate_document(project, did)
        return _json_response({"revision": project.revision,
                               "validation": report.to_dict()})

    @app.get("/documents/{did}/quality")
    async def get_quality(did: str):
        _, project = store.find_document(did)
        return _json_response({
            "quality": [
                {"question_id": qa.question_id, "verdict": qa.verdict, "note": qa.note}
                for qa in project.quality.get(did, [])
            ],
            "revision": project.revision,
        })

    @app.put("/documents/{did}/quality")
    async def put_quality(did: str, request: Request):
        pid, _ = store.find_document(did)
        revision = _required_revision(request)
        body = await request.json()
        entries = body.get("quality") if isinstance(body, dict) else body
        answers = [QualityAnswer(question_id=e.get("question_id", ""),
                                 verdict=e.get("verdict", ""),
                                 note=e.get("note", ""))
                   for e in (entries or [])]
        project = store.mutate(pid, revision, "set_quality",
                               lambda p: core_model.set_quality(p, did, answers))
        report = core_model.validate_document(project, did)
        return _json_response({"revision": project.revision,
                               "validation": report.to_dict()})

    @app.get("/documents/{did}/annotations")
    async def get_annotations(did: str):
        _, project = store.find_document(did)
        doc = core_model.document_by_id(project, did)
        return _json_response({
            "annotations": [
                {"id": a.id, "document_id": a.document_id, "kind": a.kind, "page": a.page,
                 "region": a.region, "text": a.text, "link_target": a.link_target}
                for a in doc.annotations
            ],
            "revision": project.revision,
        })

    @app.post("/documents/{did}/annotations")
    async def post_annotation(did: str, request: Request):
        pid, _ = store.find_document(did)
        revision = _required_revision(request)
        body = await request.json()
        created: list = []

        def op(p: Project) -> Project:
            updated, ann = core_model.add_annotation(
                p, did, kind=body.get("kind", ""), page=body.get("page", 0),
                region=body.get("region"), text=body.get("text"),
                link_target=body.get("link_target"))
            created.append(ann.id)
            return updated

        project = store.mutate(pid, revision, "add_annotation", op)
        return _json_response({"id": created[0], "revision": project.revision},
                              status_code=201)

    # -- triage and groups -------------------------------------------------

    @app.get("/projects/{pid}/triage/{kind}.csv")
    async def get_triage_csv(pid: str, kind: str):
        project = store.get(pid)
        table = triage.build_triage_table(project, kind)
        return Response(content=triage.table_to_csv(table), media_type="text/csv")

    @app.get("/projects/{pid}/triage/{kind}")
    async def get_triage(pid: str, kind: str):
        project = store.get(pid)
        table = triage.build_triage_table(project, kind)
        payload = table.to_dict()
        payload["revision"] = project.revision
        return _json_response(payload)

    @app.post("/projects/{pid}/triage/actions")
    async def post_action(pid: str, request: Request):
        revision = _required_revision(request)
        body = await request.json()
        action = TriageAction(result_id=body.get("result_id", ""),
                              kind=body.get("kind", ""),
                              choice=body.get("choice", ""),
                              note=body.get("note", ""))
        project = store.mutate(pid, revision, "apply_action",
                               lambda p: triage.apply_action(p, action))
        return _json_response({"revision": project.revision,
                               "groups": _groups_payload(project)})

    @app.get("/projects/{pid}/groups")
    async def get_groups(pid: str):
        project = store.get(pid)
        return _json_response({"revision": project.revision,
                               "groups": _groups_payload(project)})

    @app.post("/projects/{pid}/groups/edits")
    async def post_group_edit(pid: str, request: Request):
        revision = _required_revision(request)
        body = await request.json()
        edit = GroupEdit(op=body.get("op", ""), name=body.get("name"),
                         old=body.get("old"), new=body.get("new"),
                         result_id=body.get("result_id"),
                         to_group=body.get("to_group"))
        project = store.mutate(pid, revision, "edit_groups",
                               lambda p: triage.edit_groups(p, edit))
        return _json_response({"revision": project.revision,
                               "groups": _groups_payload(project)})

    # -- analysis -----------------------------------------------------------

    @app.get("/projects/{pid}/analysis")
    async def get_analysis(pid: str, include: str = "", sort: str = "none",
                           units: str = "standardized", group: str | None = None):
        project = store.get(pid)
        excluded = {part.strip() for part in include.split(",") if part.strip()}
        payload = analysis.build_analysis(project, excluded_ids=excluded, sort=sort,
                                          units=units, group_name=group)
        return _json_response(payload)

    @app.get("/projects/{pid}/analysis/svg")
    async def get_analysis_svg(pid: str, include: str = "", sort: str = "none",
                               units: str = "standardized", group: str | None = None):
        project = store.get(pid)
        excluded = {part.strip() for part in include.split(",") if part.strip()}
        payload = analysis.build_analysis(project, excluded_ids=excluded, sort=sort,
                                          units=units, group_name=group)
        svgs = svg_render.render_analysis_svgs(payload)
        if group is not None:
            return Response(content=svgs[group], media_type="image/svg+xml")
        combined = "\n".join(svgs.values())
        return Response(content=combined, media_type="image/svg+xml")

    return app


def _groups_payload(project: Project) -> list[dict]:
    return [
        {"name": g.name, "member_ids": list(g.member_ids),
         "meta_analyzed": g.meta_analyzed}
        for g in project.groups
    ]


def serve(project_path: str, port: int, host: str = "127.0.0.1") -> None:
    """Blocking server entry point used by the CLI."""
    import uvicorn

    store = ProjectStore()
    project = core_model.load_project(project_path)
    store.add(project, path=project_path)
    app = create_app(store)
    uvicorn.run(app, host=host, port=port, log_level="warning")
