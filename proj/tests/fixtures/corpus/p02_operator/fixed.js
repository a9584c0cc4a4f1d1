function diff(a, b) {
  return a + b;
}
module.exports = diff;
