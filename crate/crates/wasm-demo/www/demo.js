import init, { graph_info, rename_demo, order_sensitivity } from "./pkg/formulanet_demo.js";

const $ = (id) => document.getElementById(id);
const SVG_NS = "http://www.w3.org/2000/svg";

function svgEl(tag, attrs, text) {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, v);
  if (text !== undefined) el.textContent = text;
  return el;
}

function nodeClass(kind) {
  if (kind.startsWith("variable")) return "node variable";
  if (kind === "quantifier") return "node quantifier";
  return "node";
}

function renderGraph() {
  const response = JSON.parse(graph_info($("formula").value, $("mode").value));
  const errBox = $("graph-error");
  const stats = $("graph-stats");
  const edgesG = $("edges");
  const nodesG = $("nodes");
  edgesG.replaceChildren();
  nodesG.replaceChildren();
  if (!response.ok) {
    errBox.textContent = response.error;
    stats.textContent = "";
    $("dot").textContent = "";
    return;
  }
  errBox.textContent = "";
  stats.textContent =
    `nodes=${response.nodes.length} edges=${response.edges.length} ` +
    `treelets=${response.treelets} hash=${response.hash.slice(0, 16)}…`;
  $("dot").textContent = response.dot;

  // Layered layout from the BFS depths computed on the Rust side.
  const width = 1000, height = 420, margin = 46;
  const depths = response.depth;
  const maxDepth = Math.max(0, ...depths);
  const layers = Array.from({ length: maxDepth + 1 }, () => []);
  depths.forEach((d, id) => layers[d].push(id));
  const pos = new Array(response.nodes.length);
  layers.forEach((layer, d) => {
    layer.forEach((id, i) => {
      pos[id] = {
        x: ((i + 1) / (layer.length + 1)) * (width - 2 * margin) + margin,
        y: maxDepth === 0 ? height / 2 : margin + (d / maxDepth) * (height - 2 * margin),
      };
    });
  });

  const r = 17;
  for (const e of response.edges) {
    const a = pos[e.src], b = pos[e.dst];
    let d;
    if (e.src === e.dst) {
      d = `M ${a.x + r} ${a.y} C ${a.x + 55} ${a.y - 34}, ${a.x + 55} ${a.y + 34}, ${a.x + r} ${a.y + 4}`;
    } else {
      const dx = b.x - a.x, dy = b.y - a.y;
      const len = Math.hypot(dx, dy) || 1;
      const sx = a.x + (dx / len) * r, sy = a.y + (dy / len) * r;
      const tx = b.x - (dx / len) * (r + 3), ty = b.y - (dy / len) * (r + 3);
      // Bow parallel edges apart by rank so both stay visible.
      const bend = (e.rank - 1) * 14;
      const mx = (sx + tx) / 2 - (dy / len) * bend;
      const my = (sy + ty) / 2 + (dx / len) * bend;
      d = `M ${sx} ${sy} Q ${mx} ${my} ${tx} ${ty}`;
      const lab = svgEl("text", { x: mx, y: my - 3, class: "ranklab" }, String(e.rank));
      edgesG.appendChild(lab);
    }
    edgesG.appendChild(svgEl("path", { d, class: "edge" }));
  }
  for (const n of response.nodes) {
    const g = svgEl("g", { class: nodeClass(n.kind) });
    g.appendChild(svgEl("circle", { cx: pos[n.id].x, cy: pos[n.id].y, r }));
    g.appendChild(svgEl("text", { x: pos[n.id].x, y: pos[n.id].y }, n.name));
    g.appendChild(svgEl("title", {}, `node ${n.id}: ${n.name} (${n.kind})`));
    nodesG.appendChild(g);
  }
}

function runRename() {
  const response = JSON.parse(rename_demo($("formula").value, BigInt($("rename-seed").value)));
  const box = $("rename-result");
  if (!response.ok) {
    $("rename-error").textContent = response.error;
    box.replaceChildren();
    return;
  }
  $("rename-error").textContent = "";
  const verdict = (same) =>
    same ? '<span class="ok">unchanged</span>' : '<span class="bad">changed</span>';
  box.innerHTML = `
    <p>renamed: <code>${response.renamed.replace(/</g, "&lt;")}</code></p>
    <table>
      <tr><th>graph</th><th>original hash</th><th>renamed hash</th><th>verdict</th></tr>
      <tr><td>full</td><td>${response.full_hash_original.slice(0, 16)}…</td>
          <td>${response.full_hash_renamed.slice(0, 16)}…</td>
          <td>${verdict(response.full_invariant)}</td></tr>
      <tr><td>graph-old-names</td><td>${response.old_names_hash_original.slice(0, 16)}…</td>
          <td>${response.old_names_hash_renamed.slice(0, 16)}…</td>
          <td>${verdict(response.old_names_invariant)}</td></tr>
    </table>`;
}

function runOrder() {
  const response = JSON.parse(
    order_sensitivity($("formula-a").value, $("formula-b").value, BigInt($("order-seed").value)),
  );
  const box = $("order-result");
  if (!response.ok) {
    $("order-error").textContent = response.error;
    box.replaceChildren();
    return;
  }
  $("order-error").textContent = "";
  const fmt = (x) => x.toExponential(3);
  const tell = (x) =>
    x > 1e-3 ? '<span class="bad">distinguishes them</span>'
             : '<span class="ok">sees no difference</span>';
  box.innerHTML = `
    <table>
      <tr><th>update rule</th><th>pooled distance (inf-norm)</th><th>reading</th></tr>
      <tr><td>basic</td><td>${fmt(response.basic_distance)}</td><td>${tell(response.basic_distance)}</td></tr>
      <tr><td>order-preserving</td><td>${fmt(response.order_distance)}</td><td>${tell(response.order_distance)}</td></tr>
    </table>`;
}

init().then(() => {
  $("render").addEventListener("click", renderGraph);
  $("rename").addEventListener("click", runRename);
  $("compare").addEventListener("click", runOrder);
  renderGraph();
});
