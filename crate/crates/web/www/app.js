import init, { shell, base_layout, delete_certificates } from "./pkg/obstacle_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function guard(target, f) {
  try {
    target.classList.remove("err");
    f();
  } catch (e) {
    target.classList.add("err");
    target.textContent = String(e);
  }
}

function runShell() {
  guard($("sh-out"), () => {
    const r = JSON.parse(shell(num("sh-p"), num("sh-d"), num("sh-k")));
    $("sh-out").textContent = JSON.stringify(r, null, 1);
  });
}

function drawBase() {
  const canvas = $("bg-canvas");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  guard($("bg-msg"), () => {
    const r = JSON.parse(base_layout(num("bg-p"), num("bg-d"), num("bg-k")));
    const pad = 20;
    const sx = (canvas.width - 2 * pad) / Math.max(1, r.width - 1);
    const sy = (canvas.height - 2 * pad) / Math.max(1, r.k);
    const at = (v) => [pad + (r.nodes[v][0] - 1) * sx, pad + r.nodes[v][1] * sy];
    ctx.strokeStyle = "#bbb";
    for (const [u, v] of r.edges) {
      ctx.beginPath(); ctx.moveTo(...at(u)); ctx.lineTo(...at(v)); ctx.stroke();
    }
    ctx.lineWidth = 2;
    r.paths.forEach((path, i) => {
      ctx.strokeStyle = `hsl(${(i * 137) % 360} 70% 45%)`;
      ctx.beginPath(); ctx.moveTo(...at(path[0]));
      for (const v of path.slice(1)) ctx.lineTo(...at(v));
      ctx.stroke();
    });
    ctx.lineWidth = 1;
    $("bg-msg").textContent =
      `${r.nodes.length} nodes, ${r.edges.length} edges, ${r.paths.length} pairs, audit ${r.clean ? "clean" : "FAILED"}`;
  });
}

function runDeletion() {
  const table = $("op-table");
  table.innerHTML = "";
  guard($("op-msg"), () => {
    const deleted = $("op-del").value.split(",").map((s) => s.trim()).filter((s) => s).map(Number);
    const r = JSON.parse(delete_certificates($("op-host").value === "compressed", Uint32Array.from(deleted)));
    $("op-msg").textContent = `${r.nodes} nodes, ${r.edges} edges, D = ${r.D}, k = ${r.k}`;
    table.innerHTML = "<tr><th>pair</th><th>distance</th><th>stretch</th></tr>";
    for (const row of r.rows) {
      const tr = document.createElement("tr");
      if (row.deleted) tr.className = "cut";
      tr.innerHTML = `<td>${row.pair}</td><td>${row.dist ?? "inf"}</td><td>${row.stretch}</td>`;
      table.appendChild(tr);
    }
  });
}

await init();
$("sh-go").onclick = runShell;
$("bg-go").onclick = drawBase;
$("op-go").onclick = runDeletion;
runShell();
drawBase();
