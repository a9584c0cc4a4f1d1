function ready(a, b) {
  return a && b;
}
ready(true, false);
