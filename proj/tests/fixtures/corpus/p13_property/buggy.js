const user = { name: 'x', email: 'y' };
function show() {
  console.log(user.name);
}
show();
