let i = 0;
const items = [1, 2, 3];
while (i < items.length) {
  console.log(items[i]);
  i--;
}
