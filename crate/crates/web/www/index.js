// Glue generated by `wasm-bindgen --target web` lives in ./pkg (see README).
import init, { explore_group, code_parameters, list_size_table } from "./pkg/sumrank_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function show(el, fn) {
  el.classList.remove("err");
  try {
    el.textContent = fn();
  } catch (e) {
    el.classList.add("err");
    el.textContent = String(e.message ?? e);
  }
}

function renderTable(json) {
  const { rows } = JSON.parse(json);
  const cols = ["family", "shape", "d", "tau", "closed_form", "paper_literal_bound",
                "gamma_corrected_bound", "brute_force_l", "design_bound", "status"];
  const table = document.createElement("table");
  const head = table.insertRow();
  for (const c of cols) {
    const th = document.createElement("th");
    th.textContent = c;
    head.appendChild(th);
  }
  for (const r of rows) {
    const tr = table.insertRow();
    for (const c of cols) tr.insertCell().textContent = r[c] ?? "-";
    if (r.discrepancy) tr.title = r.discrepancy;
  }
  return table;
}

await init();

$("g-run").onclick = () =>
  show($("g-out"), () => explore_group(num("g-q"), num("g-n"), $("g-kind").value, num("g-index")));

$("c-run").onclick = () =>
  show($("c-out"), () => code_parameters($("c-family").value, num("c-q"), num("c-n"), num("c-t")));

$("t-run").onclick = () => {
  const out = $("t-out");
  out.replaceChildren();
  try {
    out.appendChild(renderTable(list_size_table(num("t-q"), num("t-n"), num("t-t"))));
  } catch (e) {
    const p = document.createElement("p");
    p.className = "err";
    p.textContent = String(e.message ?? e);
    out.appendChild(p);
  }
};
