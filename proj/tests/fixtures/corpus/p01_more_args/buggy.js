function sum(a, b, c) {
  return a + b + c;
}
const a = 1;
const b = 2;
const c = 3;
console.log(sum(a, b));
