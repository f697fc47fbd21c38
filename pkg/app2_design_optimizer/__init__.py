# App 2 package
