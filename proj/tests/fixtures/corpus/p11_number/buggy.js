const limit = 10;
let count = 0;
while (count < limit) {
  count += 2;
}
console.log(count);
