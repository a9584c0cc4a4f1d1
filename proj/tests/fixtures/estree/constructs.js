import * as path from 'path';
import def, { a as b, c } from './mod';
var total = 0, items = [1, 2.5, 0x1f, ...rest];
let label = `plain`;
function accumulate(list, factor = 2, ...more) {
  for (let i = 0; i < list.length; i++) {
    total += list[i] * factor;
  }
  for (const key in list) {
    if (key === 'skip') continue;
    else if (!key) break;
  }
  for (var v of more) total -= v;
  while (total > 100) {
    total = total / 2;
  }
  return total > 10 ? 'big' : null;
}
const obj = {
  name: 'x',
  'quoted': true,
  42: false,
  shorthand,
  method(a) { return this.name + a; },
  nested: { arrow: (p, q) => p && q || !p, single: z => z },
};
obj.count = typeof obj.name === 'string' ? 1 : -1;
obj['dyn'] = new Map();
items.push(new Date, void 0, delete obj.name);
label = label ?? 'none';
export const exported = function named() { throw new Error('no'); };
export function helper() { return accumulate(items); }
export default obj;
