#!/usr/bin/env python3
"""Convert Topology Zoo graphs from topohub's JSON export to GML.

topohub (https://github.com/piotrjurkiewicz/topohub, MIT) ships the Topology
Zoo dataset as node-link JSON. This writes the same graphs in the GML shape
the Zoo itself uses: undirected, one `edge` per adjacency, labels and
coordinates kept. Self-loops and parallel edges are dropped.

    zoo_json_to_gml.py OUT_DIR FILE.json...
"""

import json
import pathlib
import sys


def quote(s):
    return '"' + str(s).replace('\\', '\\\\').replace('"', "'") + '"'


def convert(src, out_dir):
    d = json.loads(pathlib.Path(src).read_text())
    name = pathlib.Path(src).stem
    ids = {}
    lines = ['graph [', '  directed 0', f'  label {quote(name)}']
    for n in d['nodes']:
        ids[n['id']] = len(ids)
        lines.append('  node [')
        lines.append(f'    id {ids[n["id"]]}')
        lines.append(f'    label {quote(n.get("name", n["id"]))}')
        pos = n.get('pos')
        if pos:
            lines.append(f'    Longitude {pos[0]}')
            lines.append(f'    Latitude {pos[1]}')
        lines.append('  ]')
    seen = set()
    for e in d['edges']:
        a, b = ids[e['source']], ids[e['target']]
        key = (min(a, b), max(a, b))
        if a == b or key in seen:
            continue
        seen.add(key)
        lines += ['  edge [', f'    source {a}', f'    target {b}', '  ]']
    lines.append(']')
    out = pathlib.Path(out_dir) / f'{name}.gml'
    out.write_text('\n'.join(lines) + '\n')
    return out, len(ids), len(seen)


def main(argv):
    if len(argv) < 3:
        print(__doc__.strip().splitlines()[-1].strip(), file=sys.stderr)
        return 2
    out_dir = pathlib.Path(argv[1])
    out_dir.mkdir(parents=True, exist_ok=True)
    for src in argv[2:]:
        out, n, m = convert(src, out_dir)
        print(f'{out} nodes {n} edges {m}')
    return 0


if __name__ == '__main__':
    sys.exit(main(sys.argv))
