const limit = 10;
let count = 0;
while (count < limit) {
  count += 1;
}
console.log(count);
