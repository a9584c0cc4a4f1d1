const names = ['a', 'b'];
for (const n in names) {
  console.log(n);
}
