"""Regenerate the bundled in-context example library.

Each entry is a hand-written parameter list for one documented endpoint,
rendered in one of several markup styles seen on real documentation sites.
Labels come from the lists, never from the extraction code.

    python3 tools/make_icl.py src/docs2oas/data/icl
"""

from __future__ import annotations

import html
import json
import shutil
import sys
from pathlib import Path

# (site, endpoint title, request rows, response rows, style)
# request row: name, type, required, location, description
# response row: dotted name, type, required, description
SITES = [
    ("payments", "Create a charge",
     [("amount", "integer", True, "body", "Amount in the smallest currency unit."),
      ("currency", "string", True, "body", "Three-letter ISO currency code."),
      ("description", "string", False, "body", "Free text shown on the receipt.")],
     [("id", "string", True, "Unique identifier of the charge."),
      ("amount", "integer", True, "Charged amount."),
      ("paid", "boolean", True, "Whether the charge succeeded.")],
     "table-th"),
    ("weather", "Current conditions",
     [("lat", "number", True, "query", "Latitude of the location."),
      ("lon", "number", True, "query", "Longitude of the location."),
      ("units", "string", False, "query", "Unit system, metric or imperial.")],
     [("temp", "number", True, "Air temperature."),
      ("humidity", "integer", True, "Relative humidity in percent."),
      ("wind.speed", "number", False, "Wind speed.")],
     "dl"),
    ("tickets", "Update a ticket",
     [("ticket_id", "integer", True, "path", "Ticket to update."),
      ("status", "string", False, "body", "New status of the ticket."),
      ("priority", "string", False, "body", "Urgency level.")],
     [("ticket.id", "integer", True, "Ticket identifier."),
      ("ticket.status", "string", True, "Current status."),
      ("ticket.updated_at", "string", False, "Time of the last change.")],
     "ul"),
    ("music", "Search tracks",
     [("q", "string", True, "query", "Search keywords."),
      ("limit", "integer", False, "query", "Maximum number of results."),
      ("offset", "integer", False, "query", "Index of the first result.")],
     [("tracks.items", "array", True, "Matching tracks."),
      ("tracks.total", "integer", True, "Number of matches."),
      ("tracks.next", "string", False, "Link to the next page.")],
     "table-nohead"),
    ("mail", "Send a message",
     [("to", "string", True, "body", "Recipient address."),
      ("subject", "string", True, "body", "Subject line."),
      ("X-Idempotency-Key", "string", False, "header", "Key that makes retries safe.")],
     [("message_id", "string", True, "Identifier of the queued message."),
      ("queued", "boolean", True, "True once the message is accepted.")],
     "cards"),
    ("maps", "Geocode an address",
     [("address", "string", True, "query", "Street address to look up."),
      ("region", "string", False, "query", "Region bias as a country code.")],
     [("results", "array", True, "Candidate locations."),
      ("status", "string", True, "Outcome of the lookup.")],
     "table-th"),
    ("storage", "Upload an object",
     [("bucket", "string", True, "path", "Target bucket name."),
      ("name", "string", True, "query", "Object name inside the bucket."),
      ("Content-Length", "integer", True, "header", "Size of the payload in bytes.")],
     [("name", "string", True, "Stored object name."),
      ("size", "integer", True, "Size in bytes."),
      ("md5Hash", "string", False, "Checksum of the content.")],
     "dl"),
    ("crm", "Create a contact",
     [("email", "string", True, "body", "Primary email address."),
      ("first_name", "string", False, "body", "Given name."),
      ("tags", "array", False, "body", "Labels attached to the contact.")],
     [("contact.id", "integer", True, "Contact identifier."),
      ("contact.email", "string", True, "Primary email address."),
      ("contact.created", "string", True, "Creation time.")],
     "table-th"),
    ("translate", "Translate text",
     [("text", "string", True, "body", "Text to translate."),
      ("target_lang", "string", True, "body", "Language code of the output."),
      ("formality", "string", False, "body", "Preferred tone.")],
     [("translations", "array", True, "One entry per input text."),
      ("detected_source_language", "string", False, "Language found in the input.")],
     "ul"),
    ("issues", "List issues",
     [("owner", "string", True, "path", "Account that owns the repository."),
      ("repo", "string", True, "path", "Repository name."),
      ("state", "string", False, "query", "Filter by open or closed."),
      ("per_page", "integer", False, "query", "Results per page.")],
     [("number", "integer", True, "Issue number."),
      ("title", "string", True, "Issue title."),
      ("labels", "array", False, "Labels on the issue.")],
     "table-loc"),
    ("shop", "Get an order",
     [("order_id", "integer", True, "path", "Order to fetch."),
      ("fields", "string", False, "query", "Comma separated list of fields to return.")],
     [("order.id", "integer", True, "Order identifier."),
      ("order.total_price", "string", True, "Total including taxes."),
      ("order.customer.email", "string", False, "Buyer email.")],
     "cards"),
    ("sms", "Send an SMS",
     [("From", "string", True, "body", "Sender number."),
      ("To", "string", True, "body", "Destination number."),
      ("Body", "string", True, "body", "Message text.")],
     [("sid", "string", True, "Message identifier."),
      ("status", "string", True, "Delivery status."),
      ("price", "string", False, "Cost of the message.")],
     "table-nohead"),
    ("analytics", "Run a report",
     [("start_date", "string", True, "body", "First day of the range."),
      ("end_date", "string", True, "body", "Last day of the range."),
      ("metrics", "array", True, "body", "Metrics to compute.")],
     [("rows", "array", True, "Report rows."),
      ("row_count", "integer", True, "Number of rows.")],
     "table-loc"),
    ("calendar", "Create an event",
     [("calendarId", "string", True, "path", "Calendar to insert into."),
      ("summary", "string", False, "body", "Event title."),
      ("sendUpdates", "string", False, "query", "Who receives notifications.")],
     [("id", "string", True, "Event identifier."),
      ("htmlLink", "string", True, "Link to the event in the web client."),
      ("start.dateTime", "string", False, "Start time.")],
     "dl"),
    ("auth", "Exchange a token",
     [("grant_type", "string", True, "body", "Kind of grant being exchanged."),
      ("code", "string", True, "body", "Authorization code."),
      ("redirect_uri", "string", False, "body", "Callback URL used in the first step.")],
     [("access_token", "string", True, "Token for API calls."),
      ("expires_in", "integer", True, "Lifetime in seconds."),
      ("refresh_token", "string", False, "Token to get a new access token.")],
     "ul"),
]


def _e(text: str) -> str:
    return html.escape(text, quote=False)


def _req_word(flag: bool) -> str:
    return "required" if flag else "optional"


def render(style: str, title: str, heading: str, rows: list[tuple], with_location: bool) -> str:
    out = [f"<div><h2>{_e(title)}</h2><h3>{_e(heading)}</h3>"]
    if style in ("table-th", "table-loc"):
        head = ["Name", "Type", "Required"] + (["In"] if style == "table-loc" and with_location else []) + ["Description"]
        out.append("<table><thead><tr>" + "".join(f"<th>{h}</th>" for h in head) + "</tr></thead><tbody>")
        for r in rows:
            cells = [r[0], r[1], "Yes" if r[2] else "No"]
            if style == "table-loc" and with_location:
                cells.append(r[3])
            cells.append(r[-1])
            out.append("<tr>" + "".join(f"<td>{_e(c)}</td>" for c in cells) + "</tr>")
        out.append("</tbody></table>")
    elif style == "table-nohead":
        out.append("<table>")
        for r in rows:
            out.append(f"<tr><td><code>{_e(r[0])}</code></td><td>{r[1]}</td><td>{_e(r[-1])}</td></tr>")
        out.append("</table>")
    elif style == "dl":
        out.append("<dl>")
        for r in rows:
            out.append(f"<dt>{_e(r[0])} <em>{r[1]}, {_req_word(r[2])}</em></dt><dd>{_e(r[-1])}</dd>")
        out.append("</dl>")
    elif style == "ul":
        out.append("<ul>")
        for r in rows:
            out.append(f"<li><code>{_e(r[0])}</code> ({r[1]}, {_req_word(r[2])}): {_e(r[-1])}</li>")
        out.append("</ul>")
    elif style == "cards":
        for r in rows:
            out.append(
                f'<div class="param"><div class="param-head"><span class="name">{_e(r[0])}</span>'
                f'<span class="type">{r[1]}</span><span class="flag">{_req_word(r[2])}</span></div>'
                f"<p>{_e(r[-1])}</p></div>"
            )
    out.append("</div>")
    return "\n".join(out) + "\n"


def request_tsv(rows: list[tuple]) -> str:
    lines = ["name\ttype\trequired\tlocation\tdescription"]
    lines += [f"{n}\t{t}\t{str(r).lower()}\t{loc}\t{d}" for n, t, r, loc, d in rows]
    return "\n".join(lines) + "\n"


def response_schema(rows: list[tuple]) -> str:
    root: dict = {"type": "object", "properties": {}}
    for name, typ, req, desc in rows:
        node = root
        parts = name.split(".")
        for p in parts[:-1]:
            node = node["properties"].setdefault(p, {"type": "object", "properties": {}})
        leaf = {"type": typ, "description": desc}
        if typ == "array":
            leaf["items"] = {}
        node["properties"][parts[-1]] = leaf
        if req:
            node.setdefault("required", []).append(parts[-1])
    return json.dumps(root, indent=2) + "\n"


def main(target: str) -> None:
    out = Path(target)
    if out.exists():
        shutil.rmtree(out)
    for i, (site, title, req, resp, style) in enumerate(SITES, 1):
        for task, rows, heading, body, suffix in (
            ("request-enrichment", req, "Parameters", request_tsv(req), "tsv"),
            ("response-enrichment", resp, "Response fields", response_schema(resp), "json"),
        ):
            d = out / f"{task.split('-')[0]}-{i:02d}-{site}"
            d.mkdir(parents=True)
            (d / "input.html").write_text(render(style, title, heading, rows, task == "request-enrichment"))
            (d / f"output.{suffix}").write_text(body)
            (d / "meta.json").write_text(json.dumps({"task": task, "source_site": site, "style": style}, indent=2) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/docs2oas/data/icl")
