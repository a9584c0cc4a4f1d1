let cart = [];
const item = { id: 1 };
const object = { id: 2 };
function add() {
  cart.push(object);
}
add();
