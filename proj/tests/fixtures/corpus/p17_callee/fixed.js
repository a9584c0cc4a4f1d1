const total = Math.min(1, 2);
console.log(total);
