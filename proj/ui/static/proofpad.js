// Minimal viewer over the HTTP bridge. The full editor UI replaces this file;
// it speaks the same messages (docs/protocol.md).
"use strict";

let state = null;
let seq = 0;
let nextId = 1;

async function request(kind, fields) {
  const res = await fetch("/api/request", {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ id: nextId++, kind, ...fields }),
  });
  const messages = await res.json();
  for (const m of Array.isArray(messages) ? messages : [messages]) apply(m);
  return messages;
}

function apply(m) {
  if (m.type === "rejected") {
    document.getElementById("status").textContent = m.error.code;
    return;
  }
  if (m.type !== "event") return;
  if (m.kind === "snapshot") {
    state = m;
  } else if (m.seq <= seq) {
    return;
  } else if (m.seq !== seq + 1) {
    // A gap: resynchronize from a fresh snapshot.
    refresh();
    return;
  } else if (m.kind === "status-changed") {
    state.forms[m.index].status = m.to;
  } else if (m.kind === "document-changed") {
    const t = state.document.text;
    state.document.text = t.slice(0, m.start) + m.text + t.slice(m.end);
    state.document.regions = m.regions;
    state.forms = m.forms;
  } else if (m.kind === "summary") {
    state.summaries.push(m);
  } else if (m.kind === "diagnostics") {
    state.diagnostics = m.items;
  } else if (m.kind === "repl-result") {
    state.repl.push(m.entry);
  }
  seq = m.seq;
  render();
}

function render() {
  const list = document.getElementById("forms");
  list.replaceChildren();
  if (!state || !state.document) return;
  state.forms.forEach((f, i) => {
    const li = document.createElement("li");
    li.className = f.status;
    li.textContent = state.document.text.slice(f.start, f.end);
    li.onclick = () => request(i < state.proof_line ? "undo-through" : "admit-through", { index: i });
    li.onmouseenter = async () => {
      const out = await request("hover-preview", { index: i });
      const plan = out[out.length - 1].result.plan;
      for (const k of plan.indices) list.children[k].classList.add("preview");
    };
    li.onmouseleave = () => {
      for (const c of list.children) c.classList.remove("preview");
    };
    list.appendChild(li);
  });
  const last = state.summaries[state.summaries.length - 1];
  document.getElementById("summary").textContent = last
    ? last.items.map((it) => `${it.severity}: ${it.headline}`).join("\n")
    : "";
}

async function refresh() {
  const res = await fetch("/api/snapshot");
  const snap = await res.json();
  state = snap;
  seq = snap.seq;
  document.getElementById("status").textContent = "connected";
  render();
}

async function poll() {
  const res = await fetch(`/api/events?after=${seq}`);
  for (const m of await res.json()) apply(m);
}

refresh().then(() => setInterval(poll, 500));
